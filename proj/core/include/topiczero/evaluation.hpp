#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topiczero/corpus.hpp"
#include "topiczero/embedding.hpp"
#include "topiczero/entailment.hpp"
#include "topiczero/topic_model.hpp"
#include "topiczero/zeroshot.hpp"

namespace topiczero::evaluation {

using corpus::LabelSet;
using Seconds = std::chrono::duration<double>;

/// The four train/eval fold layouts.
///   exp1: train on k-1 folds, evaluate on the same k-1
///   exp2: train on k-1 folds, evaluate on the held-out fold
///   exp3: train on 1 fold, evaluate on the same fold
///   exp4: train on 1 fold, evaluate on the other k-1
enum class ExperimentId { exp1, exp2, exp3, exp4 };

std::string_view to_string(ExperimentId id) noexcept;
ExperimentId parse_experiment_id(std::string_view name);

struct FoldSets {
  std::set<std::size_t> train;
  std::set<std::size_t> eval;
};

struct ExperimentSpec {
  ExperimentId id = ExperimentId::exp1;
  std::size_t k = 5;
  std::uint64_t seed = 0;

  /// Fold sets for rotation r in [0, k). Fold r is the distinguished fold.
  FoldSets folds_for_rotation(std::size_t r) const;
};

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

/// Support-weighted precision/recall/F1 plus the per-class breakdown.
struct Metrics {
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
};

/// Per-class metrics with 0 for empty denominators, averaged with weights
/// proportional to gold support.
Metrics weighted_metrics(std::span<const std::string> gold, std::span<const std::string> pred,
                         const LabelSet& labels);

struct RotationResult {
  std::size_t rotation = 0;
  FoldSets folds;
  std::vector<std::string> train_ids;
  std::vector<std::string> eval_ids;
  std::optional<Metrics> metrics;
  Seconds train_time{0};
  Seconds inference_time{0};
  std::size_t num_topics = 0;
  std::size_t fallback_count = 0;
  /// Set when the rotation failed; metrics are then absent.
  std::optional<std::string> error;

  Seconds total_time() const { return train_time + inference_time; }
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  bool baseline = false;
  std::vector<RotationResult> rotations;
  /// Population mean and standard deviation over successful rotations.
  MeanStd precision, recall, f1;
  Seconds train_time{0};
  Seconds inference_time{0};
  std::size_t failed_rotations = 0;

  Seconds total_time() const { return train_time + inference_time; }
  std::string to_json() const;
  /// Fixed-width summary table for terminals.
  std::string to_table() const;
};

struct PipelineConfig {
  explicit PipelineConfig(LabelSet label_set) : labels(std::move(label_set)) {}

  LabelSet labels;
  entailment::HypothesisTemplate topic_template{std::string(entailment::kTopicTemplate)};
  entailment::HypothesisTemplate document_template{std::string(entailment::kDocumentTemplate)};
  topic_model::TopicModelConfig topic_model;
  const embedding::Embedder* embedder = nullptr;
  const entailment::EntailmentBackend* backend = nullptr;
  bool normalize = true;
  std::size_t max_tokens = zeroshot::kDefaultMaxTokens;
};

struct RunOptions {
  /// Run only rotation 0.
  bool single_rotation = false;
  /// Execute rotations on separate threads.
  bool parallel = false;
};

/// Splits `corpus` with a stratified k-fold plan and runs every rotation of
/// `spec`: train on the train folds (labels masked), predict the eval
/// folds, score. With `baseline`, each eval document is classified
/// directly and no training happens.
ExperimentReport run_experiment(const ExperimentSpec& spec, const corpus::Corpus& corpus,
                                const PipelineConfig& config, bool baseline,
                                const RunOptions& options = {});

/// CSV of P(t_k => H(l_j)) for the min(top_n, K) largest topics, largest
/// first. Header: "topic" then label names; the first column names each
/// topic by index and top terms.
std::string export_entailment_matrix(const zeroshot::TrainedModel& model, std::size_t top_n);
void export_entailment_matrix(const zeroshot::TrainedModel& model, std::size_t top_n,
                              const std::filesystem::path& path);

}  // namespace topiczero::evaluation
