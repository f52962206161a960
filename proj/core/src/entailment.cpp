#include "topiczero/entailment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "http_client.hpp"
#include "topiczero/error.hpp"
#include "topiczero/text.hpp"

namespace topiczero::entailment {

using nlohmann::json;

HypothesisTemplate::HypothesisTemplate(std::string pattern) : pattern_(std::move(pattern)) {
  const auto first = pattern_.find("{}");
  if (first == std::string::npos) {
    throw InputError("hypothesis template '" + pattern_ + "' has no {} placeholder");
  }
  if (pattern_.find("{}", first + 2) != std::string::npos) {
    throw InputError("hypothesis template '" + pattern_ + "' has more than one {} placeholder");
  }
  slot_ = first;
}

std::string HypothesisTemplate::render(std::string_view label) const {
  std::string out;
  out.reserve(pattern_.size() + label.size());
  out.append(pattern_, 0, slot_);
  out.append(label);
  out.append(pattern_, slot_ + 2);
  return out;
}

std::vector<std::string> render_hypotheses(const HypothesisTemplate& tmpl, const LabelSet& labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (const auto& l : labels.names()) out.push_back(tmpl.render(l));
  return out;
}

// --- lexical --------------------------------------------------------------

Lexicon parse_lexicon(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed lexicon: ") + e.what());
  }
  if (!j.is_object()) throw InputError("lexicon must be a JSON object of term -> label");
  Lexicon lex;
  for (const auto& [term, label] : j.items()) {
    if (!label.is_string()) throw InputError("lexicon entry '" + term + "' is not a label name");
    auto tokens = text::word_tokens(term);
    if (tokens.size() != 1) {
      throw InputError("lexicon term '" + term + "' must be a single word");
    }
    lex[tokens.front()] = label.get<std::string>();
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_lexicon(ss.str());
}

LexicalBackend::LexicalBackend(Lexicon lexicon, double epsilon)
    : lexicon_(std::move(lexicon)), epsilon_(epsilon) {
  if (!(epsilon_ > 0.0)) throw InputError("lexical smoothing epsilon must be positive");
}

std::vector<double> LexicalBackend::entail(const EntailmentQuery& query) const {
  const auto tokens = text::word_tokens(query.premise);
  std::vector<double> scores(query.labels.size(), epsilon_);
  for (const auto& tok : tokens) {
    auto it = lexicon_.find(tok);
    if (it == lexicon_.end()) continue;
    if (auto j = query.labels.index_of(it->second)) scores[*j] += 1.0;
  }
  double denom = 0.0;
  if (query.normalize) {
    for (double s : scores) denom += s;
  } else {
    denom = epsilon_ + static_cast<double>(tokens.size());
  }
  for (double& s : scores) s /= denom;
  return scores;
}

// --- remote ---------------------------------------------------------------

RemoteBackend::RemoteBackend(embedding::RemoteSettings settings)
    : client_(std::make_unique<embedding::HttpClient>(std::move(settings))) {}

RemoteBackend::~RemoteBackend() = default;

std::vector<double> RemoteBackend::entail(const EntailmentQuery& query) const {
  const json request{{"premise", std::string(query.premise)},
                     {"hypotheses", std::vector<std::string>(query.hypotheses.begin(),
                                                             query.hypotheses.end())},
                     {"normalize", query.normalize}};
  const json response = client_->post("/entail", request);
  const std::string where = client_->settings().endpoint + "/entail";
  if (!response.is_object() || !response.contains("probs") || !response["probs"].is_array()) {
    throw ContractViolation(where + ": response lacks a 'probs' array");
  }
  std::vector<double> probs;
  for (const auto& p : response["probs"]) {
    if (!p.is_number()) throw ContractViolation(where + ": non-numeric probability");
    probs.push_back(p.get<double>());
  }
  return probs;
}

// --- predict --------------------------------------------------------------

std::vector<double> predict(std::string_view premise, const LabelSet& labels,
                            const HypothesisTemplate& tmpl, const EntailmentBackend& backend,
                            bool normalize) {
  if (text::trim(premise).empty()) throw InputError("premise must not be empty");
  const auto hypotheses = render_hypotheses(tmpl, labels);
  auto probs = backend.entail({premise, labels, hypotheses, normalize});
  if (probs.size() != labels.size()) {
    throw ContractViolation("entailment backend returned " + std::to_string(probs.size()) +
                            " probabilities for " + std::to_string(labels.size()) + " labels");
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ContractViolation("entailment backend returned probability " + std::to_string(p) +
                              " outside [0, 1]");
    }
    sum += p;
  }
  if (normalize) {
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ContractViolation("normalized entailment probabilities sum to " +
                              std::to_string(sum));
    }
    for (double& p : probs) p /= sum;
  }
  return probs;
}

std::string serialize_topic_premise(const topic_model::Topic& topic) {
  if (topic.terms.empty()) throw InputError("topic has no terms");
  std::string out;
  for (std::size_t i = 0; i < topic.terms.size(); ++i) {
    if (i) out += ", ";
    out += topic.terms[i].term;
  }
  return out;
}

EntailmentTable::EntailmentTable(std::size_t rows, std::size_t cols, std::vector<double> probs,
                                 bool row_normalized)
    : rows_(rows), cols_(cols), probs_(std::move(probs)), row_normalized_(row_normalized) {
  if (probs_.size() != rows_ * cols_) throw InputError("entailment table has the wrong shape");
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw InputError("entailment table entries must lie in [0, 1]");
    }
  }
  if (row_normalized_) {
    for (std::size_t k = 0; k < rows_; ++k) {
      double s = 0.0;
      for (double p : row(k)) s += p;
      if (std::abs(s - 1.0) > 1e-9) {
        throw InputError("entailment table row " + std::to_string(k) + " does not sum to 1");
      }
    }
  }
}

}  // namespace topiczero::entailment
