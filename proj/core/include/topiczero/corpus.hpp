#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace topiczero::corpus {

struct Document {
  std::string id;
  std::string text;
  /// Only evaluation code reads this; training sees an UnlabeledView.
  std::optional<std::string> gold_label;
};

/// Ordered, non-empty list of distinct label names. Position is the
/// tie-break order used by every argmax in the library.
class LabelSet {
 public:
  explicit LabelSet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& operator[](std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& names() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }

  bool operator==(const LabelSet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Corpus;

/// Id/text access to a corpus without any way to reach gold labels.
class UnlabeledView {
 public:
  std::size_t size() const noexcept { return docs_->size(); }
  bool empty() const noexcept { return docs_->empty(); }
  std::string_view id(std::size_t i) const { return (*docs_)[i].id; }
  std::string_view text(std::size_t i) const { return (*docs_)[i].text; }

 private:
  friend class Corpus;
  explicit UnlabeledView(std::shared_ptr<const std::vector<Document>> docs)
      : docs_(std::move(docs)) {}
  std::shared_ptr<const std::vector<Document>> docs_;
};

/// Immutable document collection with unique ids.
class Corpus {
 public:
  Corpus();
  explicit Corpus(std::vector<Document> documents);

  std::size_t size() const noexcept { return docs_->size(); }
  bool empty() const noexcept { return docs_->empty(); }
  const Document& operator[](std::size_t i) const { return (*docs_)[i]; }
  const std::vector<Document>& documents() const noexcept { return *docs_; }
  auto begin() const noexcept { return docs_->begin(); }
  auto end() const noexcept { return docs_->end(); }

  const Document* find(std::string_view id) const;
  UnlabeledView unlabeled() const { return UnlabeledView(docs_); }

 private:
  std::shared_ptr<const std::vector<Document>> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Format { jsonl, csv };

Format parse_format(std::string_view name);
/// Guesses the format from a file extension (.jsonl/.json/.ndjson -> jsonl,
/// .csv -> csv).
std::optional<Format> format_from_extension(const std::filesystem::path& path);

struct LoadOptions {
  std::vector<std::string> text_fields{"text"};
  std::string id_field = "id";
  std::string label_field = "label";
};

/// Reads a corpus; document text is the text fields joined by one space.
Corpus load_corpus(const std::filesystem::path& path, Format format,
                   const LoadOptions& options);
Corpus read_jsonl(std::istream& in, const LoadOptions& options);
Corpus read_csv(std::istream& in, const LoadOptions& options);

/// Parses RFC-4180 CSV into rows of fields. Quoted fields may contain
/// separators, doubled quotes and line breaks.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

/// Drops labeled documents whose label is outside `keep`. Unlabeled
/// documents survive.
Corpus filter_labels(const Corpus& corpus, const LabelSet& keep);

/// Assignment of every document id to one of k folds.
class FoldPlan {
 public:
  FoldPlan(std::size_t k, std::vector<std::pair<std::string, std::size_t>> assignments);

  std::size_t k() const noexcept { return k_; }
  /// (id, fold) pairs in corpus order.
  const std::vector<std::pair<std::string, std::size_t>>& assignments() const noexcept {
    return assignments_;
  }
  std::optional<std::size_t> fold_of(std::string_view id) const;
  std::string to_json() const;

 private:
  std::size_t k_;
  std::vector<std::pair<std::string, std::size_t>> assignments_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Stratified k-fold split: each class is shuffled with a seeded generator,
/// then dealt round-robin starting at fold 0, so remainders land on the
/// lowest-index folds.
FoldPlan stratified_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed);
/// As above, and additionally requires every label of `labels` to have at
/// least one document and every document label to belong to `labels`.
FoldPlan stratified_kfold(const Corpus& corpus, const LabelSet& labels, std::size_t k,
                          std::uint64_t seed);

/// Documents assigned to any fold in `folds`, in corpus order.
Corpus select_folds(const Corpus& corpus, const FoldPlan& plan,
                    const std::set<std::size_t>& folds);

}  // namespace topiczero::corpus
