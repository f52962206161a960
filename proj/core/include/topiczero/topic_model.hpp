#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topiczero/corpus.hpp"
#include "topiczero/embedding.hpp"

namespace topiczero::topic_model {

using embedding::Embedding;

struct NGramRange {
  std::size_t lo = 1;
  std::size_t hi = 3;
  bool operator==(const NGramRange&) const = default;
};

struct TopicModelConfig {
  NGramRange n_grams_range{1, 3};
  std::size_t top_n_words = 20;
  std::size_t min_topic_size = 10;
  /// Name of a registered clusterer; "threshold-agglomerative" is built in.
  std::string clustering = "threshold-agglomerative";
  /// Average-linkage merges stop at this cosine distance.
  double distance_threshold = 0.7;
  /// Exponent applied to clamped centroid similarities in the encoder.
  double sharpening = 4.0;
  std::vector<std::string> stopwords;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  /// Missing keys keep their defaults.
  static TopicModelConfig from_json(std::string_view json);
};

struct TermWeight {
  std::string term;
  double weight;
  bool operator==(const TermWeight&) const = default;
};

struct Topic {
  std::size_t index = 0;
  /// Sorted by weight descending, ties lexicographic; at most top_n_words.
  std::vector<TermWeight> terms;
  Embedding centroid;
  std::size_t size = 0;
};

/// Probability of a document belonging to each topic.
struct TopicDistribution {
  std::vector<double> weights;
  /// Set when the document resembles no topic and `weights` is the uniform
  /// fallback.
  bool fallback = false;
};

// --- clustering -----------------------------------------------------------

inline constexpr int kOutlier = -1;

class Clusterer {
 public:
  virtual ~Clusterer() = default;
  /// One cluster id per embedding. Ids are dense from 0; clusters smaller
  /// than config.min_topic_size are labeled kOutlier.
  virtual std::vector<int> cluster(std::span<const Embedding> embeddings,
                                   const TopicModelConfig& config) const = 0;
};

/// Average-linkage agglomerative clustering over cosine distance, cut at
/// config.distance_threshold. Surviving clusters are numbered by their
/// first member's position.
class AgglomerativeClusterer final : public Clusterer {
 public:
  std::vector<int> cluster(std::span<const Embedding> embeddings,
                           const TopicModelConfig& config) const override;
};

using ClustererFactory = std::function<std::unique_ptr<Clusterer>()>;

/// Makes a clusterer available under `name` for TopicModelConfig::clustering.
void register_clusterer(const std::string& name, ClustererFactory factory);
std::unique_ptr<Clusterer> make_clusterer(const std::string& name);

/// Clusters with the clusterer named in `config`.
std::vector<int> cluster(std::span<const Embedding> embeddings, const TopicModelConfig& config);

/// Relabels raw cluster ids: clusters with fewer than `min_size` members
/// become kOutlier, the rest are renumbered 0.. by first appearance.
std::vector<int> filter_small_clusters(std::span<const int> raw, std::size_t min_size);

// --- term extraction ------------------------------------------------------

/// Class-based TF-IDF over a partition of documents into classes:
///   W(t, c) = tf(t, c) * log(1 + A / f(t))
/// with tf(t, c) the count of t in class c, f(t) its count over all classes
/// and A the mean total term count per non-empty class. Returns the top
/// config.top_n_words terms per class.
std::vector<std::vector<TermWeight>> class_tfidf(
    const std::vector<std::vector<std::string_view>>& classes, const TopicModelConfig& config);

/// Top terms of `cluster_docs` against the rest of `all_docs`, which are
/// treated as a second class. `cluster_docs` must be a sub-multiset of
/// `all_docs`.
std::vector<TermWeight> extract_topic_terms(std::span<const std::string> cluster_docs,
                                            std::span<const std::string> all_docs,
                                            const TopicModelConfig& config);

// --- fitted model ---------------------------------------------------------

class FittedTopicModel {
 public:
  FittedTopicModel(TopicModelConfig config, embedding::EmbedderSpec embedder,
                   std::vector<Topic> topics, std::size_t outlier_count,
                   std::vector<int> assignments = {}, std::vector<std::string> warnings = {});

  const TopicModelConfig& config() const noexcept { return config_; }
  const embedding::EmbedderSpec& embedder_spec() const noexcept { return embedder_; }
  const std::vector<Topic>& topics() const noexcept { return topics_; }
  std::size_t num_topics() const noexcept { return topics_.size(); }
  std::size_t outlier_count() const noexcept { return outlier_count_; }

  /// Per training document: topic index or kOutlier. Empty after reload.
  const std::vector<int>& assignments() const noexcept { return assignments_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// omega_k proportional to max(0, cos(e, centroid_k))^sharpening.
  TopicDistribution encode(const Embedding& e) const;

  std::string to_json() const;
  static FittedTopicModel from_json(std::string_view json);

 private:
  TopicModelConfig config_;
  embedding::EmbedderSpec embedder_;
  std::vector<Topic> topics_;
  std::size_t outlier_count_;
  std::vector<int> assignments_;
  std::vector<std::string> warnings_;
};

/// Clusters the documents and extracts one topic per surviving cluster.
/// `clusterer` overrides config.clustering when non-null.
FittedTopicModel fit(const corpus::UnlabeledView& docs, std::span<const Embedding> embeddings,
                     const TopicModelConfig& config, const embedding::EmbedderSpec& embedder,
                     const Clusterer* clusterer = nullptr);

/// Embeds `text` with `embedder` and encodes it against `model`.
TopicDistribution topic_encoder(std::string_view id, std::string_view text,
                                const FittedTopicModel& model, const embedding::Embedder& embedder);

}  // namespace topiczero::topic_model
