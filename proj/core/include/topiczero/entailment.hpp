#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "topiczero/corpus.hpp"
#include "topiczero/embedding.hpp"
#include "topiczero/topic_model.hpp"

namespace topiczero::entailment {

using corpus::LabelSet;

/// Default hypothesis for scoring whole documents.
inline constexpr std::string_view kDocumentTemplate = "O tema principal desta notícia é {}";
/// Default hypothesis for scoring a topic's term list.
inline constexpr std::string_view kTopicTemplate = "O tema principal desta lista de palavras é {}";

/// A sentence pattern with exactly one "{}" slot for the label name.
class HypothesisTemplate {
 public:
  explicit HypothesisTemplate(std::string pattern);

  const std::string& pattern() const noexcept { return pattern_; }
  std::string render(std::string_view label) const;

  bool operator==(const HypothesisTemplate&) const = default;

 private:
  std::string pattern_;
  std::size_t slot_;
};

std::vector<std::string> render_hypotheses(const HypothesisTemplate& tmpl, const LabelSet& labels);

struct EntailmentQuery {
  std::string_view premise;
  const LabelSet& labels;
  std::span<const std::string> hypotheses;  // one per label, same order
  bool normalize;
};

/// Scores P(premise => hypothesis) for every label.
class EntailmentBackend {
 public:
  virtual ~EntailmentBackend() = default;
  virtual std::vector<double> entail(const EntailmentQuery& query) const = 0;
};

/// Term -> label-name map used by the lexical backend.
using Lexicon = std::unordered_map<std::string, std::string>;

/// Reads a JSON object mapping terms to label names. Terms are lowercased
/// with the same tokenizer the backend applies to premises.
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view json);

/// Deterministic stand-in for an NLI model. With c_l the number of premise
/// tokens the lexicon maps to label l and N the premise token count:
///   normalized: (eps + c_l) / sum_j (eps + c_j)
///   raw:        (eps + c_l) / (eps + N)
class LexicalBackend final : public EntailmentBackend {
 public:
  explicit LexicalBackend(Lexicon lexicon, double epsilon = 0.01);
  std::vector<double> entail(const EntailmentQuery& query) const override;

  double epsilon() const noexcept { return epsilon_; }

 private:
  Lexicon lexicon_;
  double epsilon_;
};

/// Client for the sidecar's POST /entail. All hypotheses for one premise
/// travel in a single request.
class RemoteBackend final : public EntailmentBackend {
 public:
  explicit RemoteBackend(embedding::RemoteSettings settings);
  ~RemoteBackend() override;

  std::vector<double> entail(const EntailmentQuery& query) const override;

 private:
  std::unique_ptr<embedding::HttpClient> client_;
};

/// Renders the hypotheses, queries the backend and checks its answer: one
/// value per label, each in [0, 1]; when normalizing, the vector is
/// rescaled to sum to exactly 1 after a 1e-6 sanity check.
std::vector<double> predict(std::string_view premise, const LabelSet& labels,
                            const HypothesisTemplate& tmpl, const EntailmentBackend& backend,
                            bool normalize = true);

/// The topic's terms in weight order, joined by ", ".
std::string serialize_topic_premise(const topic_model::Topic& topic);

/// P(t_k => H(l_j)) for K topics and m labels, row-major.
class EntailmentTable {
 public:
  EntailmentTable(std::size_t rows, std::size_t cols, std::vector<double> probs,
                  bool row_normalized);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool row_normalized() const noexcept { return row_normalized_; }
  double at(std::size_t k, std::size_t j) const { return probs_[k * cols_ + j]; }
  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(probs_).subspan(k * cols_, cols_);
  }
  std::span<const double> data() const noexcept { return probs_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> probs_;
  bool row_normalized_;
};

}  // namespace topiczero::entailment
