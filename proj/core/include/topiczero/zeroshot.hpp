#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topiczero/corpus.hpp"
#include "topiczero/embedding.hpp"
#include "topiczero/entailment.hpp"
#include "topiczero/topic_model.hpp"

namespace topiczero::zeroshot {

using corpus::LabelSet;
using entailment::EntailmentTable;
using entailment::HypothesisTemplate;
using topic_model::FittedTopicModel;
using topic_model::TopicDistribution;

/// Everything learned from an unlabeled corpus: the topic model, the
/// topic-by-label entailment table, the labels and the topic hypothesis.
class TrainedModel {
 public:
  TrainedModel(FittedTopicModel topic_model, EntailmentTable table, LabelSet labels,
               HypothesisTemplate topic_template);

  const FittedTopicModel& topic_model() const noexcept { return topic_model_; }
  const EntailmentTable& entailment_table() const noexcept { return table_; }
  const LabelSet& labels() const noexcept { return labels_; }
  const HypothesisTemplate& topic_template() const noexcept { return template_; }

  /// Versioned JSON artifact; identical models serialize to identical bytes.
  std::string to_json() const;
  static TrainedModel from_json(std::string_view json);

  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);

 private:
  FittedTopicModel topic_model_;
  EntailmentTable table_;
  LabelSet labels_;
  HypothesisTemplate template_;
};

/// theta_j = P(l_j | d) for each label.
struct LabelScores {
  std::vector<double> theta;
};

struct Prediction {
  std::size_t label_index = 0;
  std::string label;
  LabelScores scores;
  /// The document matched no topic and was encoded as uniform.
  bool topic_fallback = false;
};

/// Fits the topic model on `docs` and scores every topic's term list
/// against the label hypotheses. Gold labels are unreachable from here.
TrainedModel train(const corpus::UnlabeledView& docs, const LabelSet& labels,
                   const HypothesisTemplate& topic_template,
                   const topic_model::TopicModelConfig& config,
                   const embedding::Embedder& embedder,
                   const entailment::EntailmentBackend& backend, bool normalize = true);

/// Same as train() with precomputed document embeddings.
TrainedModel train(const corpus::UnlabeledView& docs, std::span<const embedding::Embedding> embeddings,
                   const LabelSet& labels, const HypothesisTemplate& topic_template,
                   const topic_model::TopicModelConfig& config,
                   const embedding::EmbedderSpec& embedder_spec,
                   const entailment::EntailmentBackend& backend, bool normalize = true);

/// theta_j = sum_k table[k][j] * omega_k.
LabelScores compose_probabilities(const TopicDistribution& omega, const EntailmentTable& table);

/// Index of the largest entry; the lowest index wins ties.
std::size_t argmax(std::span<const double> values);

Prediction predict(const TrainedModel& model, const embedding::Embedding& document);
Prediction predict(const TrainedModel& model, std::string_view id, std::string_view text,
                   const embedding::Embedder& embedder);
/// Embeds all inputs in one embedder call, then predicts each.
std::vector<Prediction> predict_batch(const TrainedModel& model,
                                      std::span<const embedding::EmbedInput> inputs,
                                      const embedding::Embedder& embedder);

inline constexpr std::size_t kDefaultMaxTokens = 512;

/// The first `max_tokens` whitespace tokens of `text`; shorter texts are
/// returned whole.
std::string_view truncate_premise(std::string_view text, std::size_t max_tokens);

/// Baseline: entailment of the truncated document itself against each
/// label hypothesis.
Prediction direct_classify(std::string_view text, const LabelSet& labels,
                           const HypothesisTemplate& document_template,
                           const entailment::EntailmentBackend& backend,
                           std::size_t max_tokens = kDefaultMaxTokens, bool normalize = true);

}  // namespace topiczero::zeroshot
