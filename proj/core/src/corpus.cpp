#include "topiczero/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "rng.hpp"
#include "topiczero/error.hpp"
#include "topiczero/text.hpp"

namespace topiczero::corpus {

using nlohmann::json;

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InputError("label set must not be empty");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw InputError("label names must not be empty");
    if (!index_.emplace(labels_[i], i).second) {
      throw InputError("duplicate label name '" + labels_[i] + "'");
    }
  }
}

std::optional<std::size_t> LabelSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Corpus::Corpus() : docs_(std::make_shared<const std::vector<Document>>()) {}

Corpus::Corpus(std::vector<Document> documents) {
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const auto& d = documents[i];
    if (text::trim(d.text).empty()) {
      throw InputError("document '" + d.id + "' has empty text");
    }
    if (!index_.emplace(d.id, i).second) {
      throw InputError("duplicate document id '" + d.id + "'");
    }
  }
  docs_ = std::make_shared<const std::vector<Document>>(std::move(documents));
}

const Document* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &(*docs_)[it->second];
}

Format parse_format(std::string_view name) {
  if (name == "jsonl") return Format::jsonl;
  if (name == "csv") return Format::csv;
  throw InputError("unknown corpus format '" + std::string(name) + "' (expected jsonl or csv)");
}

std::optional<Format> format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return Format::jsonl;
  if (ext == ".csv") return Format::csv;
  return std::nullopt;
}

namespace {

std::string join_fields(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ' ';
    out += parts[i];
  }
  return out;
}

void check_unique(std::unordered_map<std::string, std::size_t>& seen, const std::string& id,
                  std::size_t record, const std::string& where) {
  auto [it, inserted] = seen.emplace(id, record);
  if (!inserted) {
    throw InputError(where + ": duplicate id '" + id + "' (first seen in record " +
                     std::to_string(it->second) + ")");
  }
}

void check_text(const std::string& text, const std::string& where) {
  if (text::trim(text).empty()) throw InputError(where + ": text is empty");
}

}  // namespace

Corpus read_jsonl(std::istream& in, const LoadOptions& options) {
  if (options.text_fields.empty()) throw InputError("at least one text field is required");
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(where + ": malformed JSON: " + e.what());
    }
    if (!record.is_object()) throw InputError(where + ": record is not a JSON object");

    Document doc;
    auto id_it = record.find(options.id_field);
    if (id_it == record.end()) {
      throw InputError(where + ": record missing field '" + options.id_field + "'");
    }
    if (id_it->is_string()) {
      doc.id = id_it->get<std::string>();
    } else if (id_it->is_number_integer()) {
      doc.id = id_it->dump();
    } else {
      throw InputError(where + ": field '" + options.id_field + "' must be a string or integer");
    }

    std::vector<std::string> parts;
    for (const auto& field : options.text_fields) {
      auto it = record.find(field);
      if (it == record.end()) {
        throw InputError(where + " (id '" + doc.id + "'): record missing field '" + field + "'");
      }
      if (!it->is_string()) {
        throw InputError(where + " (id '" + doc.id + "'): field '" + field + "' is not a string");
      }
      parts.push_back(it->get<std::string>());
    }
    doc.text = join_fields(parts);
    check_text(doc.text, where + " (id '" + doc.id + "')");

    if (auto it = record.find(options.label_field); it != record.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw InputError(where + ": field '" + options.label_field + "' is not a string");
      }
      if (auto label = it->get<std::string>(); !label.empty()) doc.gold_label = std::move(label);
    }
    check_unique(seen, doc.id, line_no, where);
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool any = false;
  char c;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // A bare line break yields one empty field; treat it as a blank line.
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw InputError("CSV record " + std::to_string(rows.size() + 1) +
                           ": quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) {
    throw InputError("CSV record " + std::to_string(rows.size() + 1) + ": unterminated quoted field");
  }
  if (any && (field_started || !row.empty())) end_row();
  return rows;
}

Corpus read_csv(std::istream& in, const LoadOptions& options) {
  if (options.text_fields.empty()) throw InputError("at least one text field is required");
  const auto rows = parse_csv(in);
  if (rows.empty()) return Corpus();

  const auto& header = rows.front();
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = column(options.id_field);
  if (!id_col) throw InputError("CSV header missing column '" + options.id_field + "'");
  std::vector<std::size_t> text_cols;
  for (const auto& f : options.text_fields) {
    auto col = column(f);
    if (!col) throw InputError("CSV header missing column '" + f + "'; every record lacks it");
    text_cols.push_back(*col);
  }
  const auto label_col = column(options.label_field);

  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "record " + std::to_string(r);
    if (row.size() != header.size()) {
      throw InputError(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(row.size()));
    }
    Document doc;
    doc.id = row[*id_col];
    if (doc.id.empty()) throw InputError(where + ": empty id");
    std::vector<std::string> parts;
    for (auto col : text_cols) parts.push_back(row[col]);
    doc.text = join_fields(parts);
    check_text(doc.text, where + " (id '" + doc.id + "')");
    if (label_col && !row[*label_col].empty()) doc.gold_label = row[*label_col];
    check_unique(seen, doc.id, r, where);
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, Format format, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus file '" + path.string() + "'");
  return format == Format::jsonl ? read_jsonl(in, options) : read_csv(in, options);
}

Corpus filter_labels(const Corpus& corpus, const LabelSet& keep) {
  std::vector<Document> kept;
  for (const auto& d : corpus) {
    if (!d.gold_label || keep.contains(*d.gold_label)) kept.push_back(d);
  }
  return Corpus(std::move(kept));
}

FoldPlan::FoldPlan(std::size_t k, std::vector<std::pair<std::string, std::size_t>> assignments)
    : k_(k), assignments_(std::move(assignments)) {
  if (k_ < 2) throw InputError("fold count k must be at least 2");
  for (std::size_t i = 0; i < assignments_.size(); ++i) {
    const auto& [id, fold] = assignments_[i];
    if (fold >= k_) throw InputError("fold index out of range for '" + id + "'");
    if (!index_.emplace(id, i).second) throw InputError("document '" + id + "' assigned twice");
  }
}

std::optional<std::size_t> FoldPlan::fold_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return assignments_[it->second].second;
}

std::string FoldPlan::to_json() const {
  json j;
  j["k"] = k_;
  json a = json::array();
  for (const auto& [id, fold] : assignments_) a.push_back({id, fold});
  j["assignments"] = std::move(a);
  return j.dump();
}

FoldPlan stratified_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InputError("fold count k must be at least 2");
  // std::map keeps class iteration order independent of corpus order.
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& d = corpus[i];
    if (!d.gold_label) {
      throw InputError("stratified split needs gold labels; document '" + d.id + "' has none");
    }
    by_class[*d.gold_label].push_back(i);
  }

  std::vector<std::size_t> fold(corpus.size());
  std::mt19937_64 gen(seed);
  for (auto& [label, members] : by_class) {
    detail::shuffle(members, gen);
    for (std::size_t r = 0; r < members.size(); ++r) fold[members[r]] = r % k;
  }

  std::vector<std::pair<std::string, std::size_t>> assignments;
  assignments.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) assignments.emplace_back(corpus[i].id, fold[i]);
  return FoldPlan(k, std::move(assignments));
}

FoldPlan stratified_kfold(const Corpus& corpus, const LabelSet& labels, std::size_t k,
                          std::uint64_t seed) {
  std::vector<std::size_t> counts(labels.size(), 0);
  for (const auto& d : corpus) {
    if (!d.gold_label) continue;
    auto idx = labels.index_of(*d.gold_label);
    if (!idx) {
      throw InputError("document '" + d.id + "' has label '" + *d.gold_label +
                       "' outside the label set");
    }
    ++counts[*idx];
  }
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (counts[j] == 0) throw InputError("class '" + labels[j] + "' has no documents");
  }
  return stratified_kfold(corpus, k, seed);
}

Corpus select_folds(const Corpus& corpus, const FoldPlan& plan,
                    const std::set<std::size_t>& folds) {
  for (auto f : folds) {
    if (f >= plan.k()) {
      throw InputError("fold index " + std::to_string(f) + " out of range [0, " +
                       std::to_string(plan.k()) + ")");
    }
  }
  std::vector<Document> picked;
  for (const auto& d : corpus) {
    auto f = plan.fold_of(d.id);
    if (!f) throw LookupError("document '" + d.id + "' is not in the fold plan");
    if (folds.contains(*f)) picked.push_back(d);
  }
  return Corpus(std::move(picked));
}

}  // namespace topiczero::corpus
