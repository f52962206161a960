#include "topiczero/zeroshot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "serialization.hpp"
#include "topiczero/error.hpp"
#include "topiczero/text.hpp"

namespace topiczero::zeroshot {

using nlohmann::json;

TrainedModel::TrainedModel(FittedTopicModel topic_model, EntailmentTable table, LabelSet labels,
                           HypothesisTemplate topic_template)
    : topic_model_(std::move(topic_model)),
      table_(std::move(table)),
      labels_(std::move(labels)),
      template_(std::move(topic_template)) {
  if (table_.rows() != topic_model_.num_topics() || table_.cols() != labels_.size()) {
    throw InputError("entailment table is " + std::to_string(table_.rows()) + "x" +
                     std::to_string(table_.cols()) + " but the model has " +
                     std::to_string(topic_model_.num_topics()) + " topics and " +
                     std::to_string(labels_.size()) + " labels");
  }
}

std::string TrainedModel::to_json() const {
  json rows = json::array();
  for (std::size_t k = 0; k < table_.rows(); ++k) {
    auto r = table_.row(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  const json j{{"format", "topiczero.model"},
               {"version", 1},
               {"labels", labels_.names()},
               {"topic_template", template_.pattern()},
               {"entailment_table", {{"row_normalized", table_.row_normalized()},
                                     {"probs", std::move(rows)}}},
               {"topic_model", detail::topic_model_to_json(topic_model_)}};
  return j.dump();
}

TrainedModel TrainedModel::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed model artifact: ") + e.what());
  }
  detail::check_header(j, "topiczero.model", 1);
  try {
    LabelSet labels(j.at("labels").get<std::vector<std::string>>());
    HypothesisTemplate tmpl(j.at("topic_template").get<std::string>());
    const auto& t = j.at("entailment_table");
    const auto rows = t.at("probs").get<std::vector<std::vector<double>>>();
    std::vector<double> flat;
    for (const auto& r : rows) {
      if (r.size() != labels.size()) throw InputError("entailment table row has the wrong length");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    EntailmentTable table(rows.size(), labels.size(), std::move(flat),
                          t.at("row_normalized").get<bool>());
    return TrainedModel(detail::topic_model_from_json(j.at("topic_model")), std::move(table),
                        std::move(labels), std::move(tmpl));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model artifact: ") + e.what());
  }
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write model artifact '" + path.string() + "'");
  out << to_json() << '\n';
  if (!out) throw InputError("failed writing model artifact '" + path.string() + "'");
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model artifact '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

TrainedModel train(const corpus::UnlabeledView& docs, std::span<const embedding::Embedding> embeddings,
                   const LabelSet& labels, const HypothesisTemplate& topic_template,
                   const topic_model::TopicModelConfig& config,
                   const embedding::EmbedderSpec& embedder_spec,
                   const entailment::EntailmentBackend& backend, bool normalize) {
  auto tm = topic_model::fit(docs, embeddings, config, embedder_spec);
  std::vector<double> probs;
  probs.reserve(tm.num_topics() * labels.size());
  for (const auto& topic : tm.topics()) {
    const auto row = entailment::predict(entailment::serialize_topic_premise(topic), labels,
                                         topic_template, backend, normalize);
    probs.insert(probs.end(), row.begin(), row.end());
  }
  EntailmentTable table(tm.num_topics(), labels.size(), std::move(probs), normalize);
  return TrainedModel(std::move(tm), std::move(table), labels, topic_template);
}

TrainedModel train(const corpus::UnlabeledView& docs, const LabelSet& labels,
                   const HypothesisTemplate& topic_template,
                   const topic_model::TopicModelConfig& config,
                   const embedding::Embedder& embedder,
                   const entailment::EntailmentBackend& backend, bool normalize) {
  config.validate();
  if (docs.size() < config.min_topic_size) {
    throw InputError("corpus too small: " + std::to_string(docs.size()) +
                     " documents, min_topic_size is " + std::to_string(config.min_topic_size));
  }
  std::vector<embedding::EmbedInput> inputs;
  inputs.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) inputs.push_back({docs.id(i), docs.text(i)});
  const auto embeddings = embedder.embed(inputs);
  return train(docs, embeddings, labels, topic_template, config, embedder.spec(), backend,
               normalize);
}

LabelScores compose_probabilities(const TopicDistribution& omega, const EntailmentTable& table) {
  if (omega.weights.size() != table.rows()) {
    throw InputError("topic distribution has " + std::to_string(omega.weights.size()) +
                     " entries but the table has " + std::to_string(table.rows()) + " rows");
  }
  LabelScores out{std::vector<double>(table.cols(), 0.0)};
  for (std::size_t k = 0; k < table.rows(); ++k) {
    const double w = omega.weights[k];
    const auto row = table.row(k);
    for (std::size_t j = 0; j < table.cols(); ++j) out.theta[j] += row[j] * w;
  }
  // Rounding in the sum can overshoot 1 by an ulp.
  for (auto& t : out.theta) t = std::min(t, 1.0);
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InputError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

Prediction decide(const LabelSet& labels, LabelScores scores, bool fallback) {
  Prediction p;
  p.label_index = argmax(scores.theta);
  p.label = labels[p.label_index];
  p.scores = std::move(scores);
  p.topic_fallback = fallback;
  return p;
}

}  // namespace

Prediction predict(const TrainedModel& model, const embedding::Embedding& document) {
  const auto omega = model.topic_model().encode(document);
  return decide(model.labels(), compose_probabilities(omega, model.entailment_table()),
                omega.fallback);
}

Prediction predict(const TrainedModel& model, std::string_view id, std::string_view text,
                   const embedding::Embedder& embedder) {
  if (text::trim(text).empty()) throw InputError("cannot classify an empty document");
  return predict(model, embedder.embed_one(id, text));
}

std::vector<Prediction> predict_batch(const TrainedModel& model,
                                      std::span<const embedding::EmbedInput> inputs,
                                      const embedding::Embedder& embedder) {
  for (const auto& in : inputs) {
    if (text::trim(in.text).empty()) {
      throw InputError("cannot classify empty document '" + std::string(in.id) + "'");
    }
  }
  const auto embeddings = embedder.embed(inputs);
  std::vector<Prediction> out;
  out.reserve(inputs.size());
  for (const auto& e : embeddings) out.push_back(predict(model, e));
  return out;
}

std::string_view truncate_premise(std::string_view text, std::size_t max_tokens) {
  if (max_tokens < 1) throw InputError("max_tokens must be at least 1");
  return text::truncate_whitespace_tokens(text, max_tokens);
}

Prediction direct_classify(std::string_view text, const LabelSet& labels,
                           const HypothesisTemplate& document_template,
                           const entailment::EntailmentBackend& backend, std::size_t max_tokens,
                           bool normalize) {
  const auto premise = truncate_premise(text, max_tokens);
  auto probs = entailment::predict(premise, labels, document_template, backend, normalize);
  return decide(labels, LabelScores{std::move(probs)}, false);
}

}  // namespace topiczero::zeroshot
