#include "topiczero/topic_model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "serialization.hpp"
#include "topiczero/error.hpp"
#include "topiczero/text.hpp"

namespace topiczero::topic_model {

using nlohmann::json;

void TopicModelConfig::validate() const {
  if (n_grams_range.lo < 1 || n_grams_range.lo > n_grams_range.hi) {
    throw InputError("n_grams_range must satisfy 1 <= lo <= hi");
  }
  if (top_n_words < 1) throw InputError("top_n_words must be at least 1");
  if (min_topic_size < 2) throw InputError("min_topic_size must be at least 2");
  if (!(distance_threshold > 0.0 && distance_threshold <= 2.0)) {
    throw InputError("distance_threshold must lie in (0, 2]");
  }
  if (!(sharpening > 0.0) || !std::isfinite(sharpening)) {
    throw InputError("sharpening exponent must be positive");
  }
  if (clustering.empty()) throw InputError("clustering method must be named");
}

std::string TopicModelConfig::to_json() const { return detail::config_to_json(*this).dump(); }

TopicModelConfig TopicModelConfig::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw InputError("topic model config must be a JSON object");
    return detail::config_from_json(j);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed topic model config: ") + e.what());
  }
}

// --- c-TF-IDF -------------------------------------------------------------

namespace {

using Counts = std::unordered_map<std::string, double>;

std::unordered_set<std::string> stopword_set(const TopicModelConfig& config) {
  std::unordered_set<std::string> out;
  for (const auto& w : config.stopwords) {
    for (auto& tok : text::word_tokens(w)) out.insert(std::move(tok));
  }
  return out;
}

// N-grams never span two documents of the same class.
double count_terms(std::string_view doc, const TopicModelConfig& config,
                   const std::unordered_set<std::string>& stop, Counts& into) {
  const auto grams =
      text::analyze(doc, config.n_grams_range.lo, config.n_grams_range.hi, stop);
  for (const auto& g : grams) into[g] += 1.0;
  return static_cast<double>(grams.size());
}

std::vector<TermWeight> top_terms(const Counts& class_counts, const Counts& totals,
                                  double average_class_size, std::size_t q) {
  std::vector<TermWeight> terms;
  terms.reserve(class_counts.size());
  for (const auto& [term, tf] : class_counts) {
    const double f = totals.at(term);
    terms.push_back({term, tf * std::log(1.0 + average_class_size / f)});
  }
  auto by_weight = [](const TermWeight& a, const TermWeight& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.term < b.term;
  };
  const std::size_t keep = std::min(q, terms.size());
  std::partial_sort(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(keep), terms.end(),
                    by_weight);
  terms.resize(keep);
  return terms;
}

}  // namespace

std::vector<std::vector<TermWeight>> class_tfidf(
    const std::vector<std::vector<std::string_view>>& classes, const TopicModelConfig& config) {
  config.validate();
  const auto stop = stopword_set(config);
  std::vector<Counts> per_class(classes.size());
  Counts totals;
  double grand_total = 0.0;
  std::size_t nonempty = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    double class_total = 0.0;
    for (auto doc : classes[c]) class_total += count_terms(doc, config, stop, per_class[c]);
    for (const auto& [term, n] : per_class[c]) totals[term] += n;
    grand_total += class_total;
    if (class_total > 0.0) ++nonempty;
  }
  if (grand_total == 0.0) throw InputError("empty vocabulary after tokenization and stopword removal");
  const double average = grand_total / static_cast<double>(nonempty);

  std::vector<std::vector<TermWeight>> out;
  out.reserve(classes.size());
  for (const auto& counts : per_class) {
    out.push_back(top_terms(counts, totals, average, config.top_n_words));
  }
  return out;
}

std::vector<TermWeight> extract_topic_terms(std::span<const std::string> cluster_docs,
                                            std::span<const std::string> all_docs,
                                            const TopicModelConfig& config) {
  config.validate();
  if (cluster_docs.empty()) throw InputError("cluster has no documents");
  const auto stop = stopword_set(config);
  Counts cluster, totals;
  double cluster_total = 0.0, grand_total = 0.0;
  for (const auto& d : cluster_docs) cluster_total += count_terms(d, config, stop, cluster);
  for (const auto& d : all_docs) grand_total += count_terms(d, config, stop, totals);
  if (cluster_total == 0.0) {
    throw InputError("empty vocabulary after tokenization and stopword removal");
  }
  for (const auto& [term, n] : cluster) {
    auto it = totals.find(term);
    if (it == totals.end() || it->second < n) {
      throw InputError("cluster documents are not a subset of all documents");
    }
  }
  const double rest_total = grand_total - cluster_total;
  if (rest_total < 0.0) throw InputError("cluster documents are not a subset of all documents");
  const double average = rest_total > 0.0 ? grand_total / 2.0 : grand_total;
  return top_terms(cluster, totals, average, config.top_n_words);
}

// --- fitted model ---------------------------------------------------------

FittedTopicModel::FittedTopicModel(TopicModelConfig config, embedding::EmbedderSpec embedder,
                                   std::vector<Topic> topics, std::size_t outlier_count,
                                   std::vector<int> assignments,
                                   std::vector<std::string> warnings)
    : config_(std::move(config)),
      embedder_(std::move(embedder)),
      topics_(std::move(topics)),
      outlier_count_(outlier_count),
      assignments_(std::move(assignments)),
      warnings_(std::move(warnings)) {
  if (topics_.empty()) throw InputError("a topic model needs at least one topic");
  const std::size_t dim = topics_.front().centroid.dim();
  for (std::size_t k = 0; k < topics_.size(); ++k) {
    const auto& t = topics_[k];
    if (t.index != k) throw InputError("topic indices must be 0..K-1 in order");
    if (t.terms.empty()) throw InputError("topic " + std::to_string(k) + " has no terms");
    if (t.centroid.dim() != dim) throw InputError("topic centroids differ in dimension");
    if (std::abs(t.centroid.norm() - 1.0) > 1e-9) {
      throw InputError("topic " + std::to_string(k) + " centroid is not unit length");
    }
  }
}

TopicDistribution FittedTopicModel::encode(const Embedding& e) const {
  TopicDistribution out;
  out.weights.resize(topics_.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < topics_.size(); ++k) {
    const double c = embedding::cosine_similarity(e, topics_[k].centroid);
    out.weights[k] = c > 0.0 ? std::pow(c, config_.sharpening) : 0.0;
    sum += out.weights[k];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(topics_.size()));
    out.fallback = true;
    return out;
  }
  for (double& w : out.weights) w /= sum;
  return out;
}

std::string FittedTopicModel::to_json() const { return detail::topic_model_to_json(*this).dump(); }

FittedTopicModel FittedTopicModel::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed topic model artifact: ") + e.what());
  }
  return detail::topic_model_from_json(j);
}

namespace {

bool all_identical(std::span<const Embedding> embeddings) {
  for (std::size_t i = 1; i < embeddings.size(); ++i) {
    if (embeddings[i] != embeddings[0]) return false;
  }
  return true;
}

}  // namespace

FittedTopicModel fit(const corpus::UnlabeledView& docs, std::span<const Embedding> embeddings,
                     const TopicModelConfig& config, const embedding::EmbedderSpec& embedder,
                     const Clusterer* clusterer) {
  config.validate();
  const std::size_t n = docs.size();
  if (embeddings.size() != n) {
    throw InputError("got " + std::to_string(embeddings.size()) + " embeddings for " +
                     std::to_string(n) + " documents");
  }
  if (n < config.min_topic_size) {
    throw InputError("corpus too small: " + std::to_string(n) +
                     " documents, min_topic_size is " + std::to_string(config.min_topic_size));
  }

  std::vector<std::string> warnings;
  std::vector<int> labels;
  if (all_identical(embeddings)) {
    warnings.push_back("all document embeddings are identical; fitted a single topic");
    labels.assign(n, 0);
  } else {
    std::unique_ptr<Clusterer> owned;
    if (!clusterer) {
      owned = make_clusterer(config.clustering);
      clusterer = owned.get();
    }
    auto raw = clusterer->cluster(embeddings, config);
    if (raw.size() != n) throw ContractViolation("clusterer returned the wrong number of labels");
    labels = filter_small_clusters(raw, config.min_topic_size);
  }

  const int num_topics = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (num_topics == 0) {
    throw InputError("no cluster reached min_topic_size=" + std::to_string(config.min_topic_size) +
                     "; every document is an outlier");
  }

  // One c-TF-IDF class per topic, plus the outlier pool when it is non-empty.
  std::vector<std::vector<std::string_view>> classes(static_cast<std::size_t>(num_topics) + 1);
  std::vector<std::vector<double>> sums(static_cast<std::size_t>(num_topics),
                                        std::vector<double>(embeddings[0].dim(), 0.0));
  std::vector<std::size_t> sizes(static_cast<std::size_t>(num_topics), 0);
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == kOutlier) {
      classes.back().push_back(docs.text(i));
      ++outliers;
      continue;
    }
    const auto k = static_cast<std::size_t>(labels[i]);
    classes[k].push_back(docs.text(i));
    ++sizes[k];
    const auto v = embeddings[i].values();
    for (std::size_t d = 0; d < v.size(); ++d) sums[k][d] += v[d];
  }
  if (classes.back().empty()) classes.pop_back();
  auto terms = class_tfidf(classes, config);

  std::vector<Topic> topics;
  topics.reserve(static_cast<std::size_t>(num_topics));
  for (std::size_t k = 0; k < static_cast<std::size_t>(num_topics); ++k) {
    if (terms[k].empty()) {
      throw InputError("topic " + std::to_string(k) +
                       " has an empty vocabulary after stopword removal");
    }
    Embedding centroid;
    try {
      centroid = embedding::normalized(std::move(sums[k]));
    } catch (const InputError&) {
      throw InputError("topic " + std::to_string(k) + " has a zero centroid");
    }
    topics.push_back({k, std::move(terms[k]), std::move(centroid), sizes[k]});
  }
  return FittedTopicModel(config, embedder, std::move(topics), outliers, std::move(labels),
                          std::move(warnings));
}

TopicDistribution topic_encoder(std::string_view id, std::string_view text,
                                const FittedTopicModel& model,
                                const embedding::Embedder& embedder) {
  if (text::trim(text).empty()) throw InputError("cannot encode an empty document");
  return model.encode(embedder.embed_one(id, text));
}

}  // namespace topiczero::topic_model

// --- serialization --------------------------------------------------------

namespace topiczero::detail {

using nlohmann::json;

void check_header(const json& j, std::string_view format, int version) {
  if (!j.is_object() || !j.contains("format") || j["format"] != format) {
    throw InputError("artifact is not a '" + std::string(format) + "' document");
  }
  if (!j.contains("version") || j["version"] != version) {
    throw InputError("unsupported '" + std::string(format) + "' version " +
                     (j.contains("version") ? j["version"].dump() : std::string("<missing>")) +
                     " (expected " + std::to_string(version) + ")");
  }
}

json embedder_to_json(const embedding::EmbedderSpec& spec) {
  json j;
  j["kind"] = std::string(embedding::to_string(spec.kind));
  j["dim"] = spec.dim;
  if (spec.kind == embedding::EmbedderKind::remote) {
    j["endpoint"] = spec.remote.endpoint;
    j["batch_size"] = spec.remote.batch_size;
    j["max_in_flight"] = spec.remote.max_in_flight;
  }
  if (spec.kind == embedding::EmbedderKind::precomputed) {
    j["path"] = spec.precomputed_path.generic_string();
  }
  return j;
}

embedding::EmbedderSpec embedder_from_json(const json& j) {
  embedding::EmbedderSpec spec;
  spec.kind = embedding::parse_embedder_kind(j.at("kind").get<std::string>());
  spec.dim = j.at("dim").get<std::size_t>();
  if (j.contains("endpoint")) spec.remote.endpoint = j["endpoint"].get<std::string>();
  if (j.contains("batch_size")) spec.remote.batch_size = j["batch_size"].get<std::size_t>();
  if (j.contains("max_in_flight")) spec.remote.max_in_flight = j["max_in_flight"].get<std::size_t>();
  if (j.contains("path")) spec.precomputed_path = j["path"].get<std::string>();
  return spec;
}

json config_to_json(const topic_model::TopicModelConfig& c) {
  return json{{"n_grams_range", {c.n_grams_range.lo, c.n_grams_range.hi}},
              {"top_n_words", c.top_n_words},
              {"min_topic_size", c.min_topic_size},
              {"clustering", c.clustering},
              {"distance_threshold", c.distance_threshold},
              {"sharpening", c.sharpening},
              {"stopwords", c.stopwords},
              {"seed", c.seed}};
}

topic_model::TopicModelConfig config_from_json(const json& j) {
  topic_model::TopicModelConfig c;
  if (j.contains("n_grams_range")) {
    const auto& r = j["n_grams_range"];
    if (!r.is_array() || r.size() != 2) throw InputError("n_grams_range must be [lo, hi]");
    c.n_grams_range = {r[0].get<std::size_t>(), r[1].get<std::size_t>()};
  }
  if (j.contains("top_n_words")) c.top_n_words = j["top_n_words"].get<std::size_t>();
  if (j.contains("min_topic_size")) c.min_topic_size = j["min_topic_size"].get<std::size_t>();
  if (j.contains("clustering")) c.clustering = j["clustering"].get<std::string>();
  if (j.contains("distance_threshold")) c.distance_threshold = j["distance_threshold"].get<double>();
  if (j.contains("sharpening")) c.sharpening = j["sharpening"].get<double>();
  if (j.contains("stopwords")) c.stopwords = j["stopwords"].get<std::vector<std::string>>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  c.validate();
  return c;
}

json topic_model_to_json(const topic_model::FittedTopicModel& model) {
  json topics = json::array();
  for (const auto& t : model.topics()) {
    json terms = json::array();
    for (const auto& tw : t.terms) terms.push_back({tw.term, tw.weight});
    topics.push_back({{"index", t.index},
                      {"size", t.size},
                      {"terms", std::move(terms)},
                      {"centroid", std::vector<double>(t.centroid.values().begin(),
                                                       t.centroid.values().end())}});
  }
  return json{{"format", "topiczero.topic_model"},
              {"version", 1},
              {"config", config_to_json(model.config())},
              {"embedder", embedder_to_json(model.embedder_spec())},
              {"outlier_count", model.outlier_count()},
              {"topics", std::move(topics)}};
}

topic_model::FittedTopicModel topic_model_from_json(const json& j) {
  check_header(j, "topiczero.topic_model", 1);
  try {
    std::vector<topic_model::Topic> topics;
    for (const auto& t : j.at("topics")) {
      topic_model::Topic topic;
      topic.index = t.at("index").get<std::size_t>();
      topic.size = t.at("size").get<std::size_t>();
      for (const auto& tw : t.at("terms")) {
        topic.terms.push_back({tw.at(0).get<std::string>(), tw.at(1).get<double>()});
      }
      topic.centroid = embedding::Embedding(t.at("centroid").get<std::vector<double>>());
      topics.push_back(std::move(topic));
    }
    return topic_model::FittedTopicModel(config_from_json(j.at("config")),
                                         embedder_from_json(j.at("embedder")), std::move(topics),
                                         j.at("outlier_count").get<std::size_t>());
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed topic model artifact: ") + e.what());
  }
}

}  // namespace topiczero::detail
