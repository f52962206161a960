#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "topiczero/error.hpp"
#include "topiczero/evaluation.hpp"
#include "topiczero/zeroshot.hpp"

namespace topiczero::cli {
namespace {

using nlohmann::json;

struct Overrides {
  std::string config;
  std::string corpus;
  std::optional<std::uint64_t> seed;
  std::string endpoint;
  std::string lexicon;
  std::string output;
};

void add_config_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("-c,--config", o.config, "run configuration (JSON)")->required();
  cmd.add_option("--corpus", o.corpus, "corpus file, overrides the config");
  cmd.add_option("--seed", o.seed, "random seed, overrides the config");
  cmd.add_option("--endpoint", o.endpoint, "inference service URL for remote backends");
  cmd.add_option("--lexicon", o.lexicon, "lexicon file for the lexical backend");
}

RunConfig resolve_config(const Overrides& o) {
  auto c = load_run_config(o.config);
  if (!o.corpus.empty()) c.corpus_path = o.corpus;
  if (o.seed) c.seed = *o.seed;
  if (!o.lexicon.empty()) c.backend.lexicon = o.lexicon;
  apply_endpoint_override(c);
  if (!o.endpoint.empty()) {
    c.embedder.remote.endpoint = o.endpoint;
    c.backend.remote.endpoint = o.endpoint;
  }
  validate(c);
  c.topic_model.seed = *c.seed;
  return c;
}

corpus::Corpus load(const std::filesystem::path& path, std::optional<corpus::Format> format,
                    const corpus::LoadOptions& options) {
  if (!std::filesystem::is_regular_file(path)) {
    throw InputError("input file '" + path.string() + "' does not exist");
  }
  if (!format) format = corpus::format_from_extension(path);
  if (!format) throw InputError("cannot tell the format of '" + path.string() + "'; pass --format");
  return corpus::load_corpus(path, *format, options);
}

std::unique_ptr<entailment::EntailmentBackend> make_backend(const BackendConfig& b) {
  if (b.kind == BackendKind::remote) return std::make_unique<entailment::RemoteBackend>(b.remote);
  return std::make_unique<entailment::LexicalBackend>(entailment::load_lexicon(b.lexicon));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw InputError("failed writing '" + path.string() + "'");
}

void print_summary(const zeroshot::TrainedModel& model, std::ostream& out) {
  const auto& tm = model.topic_model();
  out << "topics: " << tm.num_topics() << "  outliers: " << tm.outlier_count() << "\n";
  for (const auto& t : tm.topics()) {
    out << "  topic " << t.index << "  size " << t.size << "  ";
    const auto n = std::min<std::size_t>(t.terms.size(), 5);
    for (std::size_t i = 0; i < n; ++i) out << (i ? ", " : "") << t.terms[i].term;
    const auto row = model.entailment_table().row(t.index);
    const auto best = zeroshot::argmax(row);
    out << "  -> " << model.labels()[best] << "\n";
  }
}

// --- train -------------------------------------------------------------------

int cmd_train(const Overrides& o, std::ostream& out, std::ostream& err) {
  auto c = resolve_config(o);
  if (!o.output.empty()) c.model_path = o.output;
  const auto docs = load(c.corpus_path, c.corpus_format, c.ingest);
  const auto embedder = embedding::make_embedder(c.embedder);
  const auto backend = make_backend(c.backend);
  const auto model = zeroshot::train(docs.unlabeled(), corpus::LabelSet(c.labels),
                                     entailment::HypothesisTemplate(c.topic_template),
                                     c.topic_model, *embedder, *backend, c.normalize);
  for (const auto& w : model.topic_model().warnings()) err << "warning: " << w << "\n";
  if (c.model_path.has_parent_path()) std::filesystem::create_directories(c.model_path.parent_path());
  model.save(c.model_path);
  print_summary(model, out);
  out << "model written to " << c.model_path.string() << "\n";
  return 0;
}

// --- predict -----------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string input;
  std::string output;
  std::string format;
  std::vector<std::string> text_fields;
  std::string id_field;
  std::string embeddings;
  std::string endpoint;
  std::string config;
};

bool blank_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  char ch;
  while (in.get(ch)) {
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

int cmd_predict(const PredictArgs& a, std::ostream& out, std::ostream&) {
  const auto model = zeroshot::TrainedModel::load(a.model);
  if (!std::filesystem::is_regular_file(a.input)) {
    throw InputError("input file '" + a.input + "' does not exist");
  }
  if (blank_file(a.input)) {
    write_file(a.output, "");
    out << "0 predictions written to " << a.output << "\n";
    return 0;
  }
  corpus::LoadOptions opts;
  if (!a.config.empty()) opts = load_run_config(a.config).ingest;
  if (!a.text_fields.empty()) opts.text_fields = a.text_fields;
  if (!a.id_field.empty()) opts.id_field = a.id_field;
  const auto docs = load(a.input, a.format.empty() ? std::nullopt
                                                   : std::optional(corpus::parse_format(a.format)),
                         opts);

  auto spec = model.topic_model().embedder_spec();
  apply_endpoint_override(spec);
  if (!a.endpoint.empty()) spec.remote.endpoint = a.endpoint;
  if (!a.embeddings.empty()) spec.precomputed_path = a.embeddings;
  const auto embedder = embedding::make_embedder(spec);

  std::vector<embedding::EmbedInput> inputs;
  for (const auto& d : docs) inputs.push_back({d.id, d.text});
  const auto preds = zeroshot::predict_batch(model, inputs, *embedder);

  std::string body;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    body += json{{"id", docs[i].id}, {"label", preds[i].label}, {"theta", preds[i].scores.theta}}.dump();
    body += "\n";
  }
  write_file(a.output, body);
  out << preds.size() << " predictions written to " << a.output << "\n";
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string experiment = "exp1";
  bool baseline = false;
  bool single_rotation = false;
  bool parallel = false;
  std::optional<std::size_t> k;
  std::optional<std::size_t> max_tokens;
  std::string report;
};

int cmd_evaluate(const Overrides& o, const EvaluateArgs& a, std::ostream& out, std::ostream&) {
  const auto id = evaluation::parse_experiment_id(a.experiment);
  auto c = resolve_config(o);
  if (a.k) c.k = *a.k;
  if (a.max_tokens) c.max_tokens = *a.max_tokens;
  if (!a.report.empty()) c.report_path = a.report;

  const corpus::LabelSet labels(c.labels);
  const auto docs = corpus::filter_labels(load(c.corpus_path, c.corpus_format, c.ingest), labels);
  const auto embedder = embedding::make_embedder(c.embedder);
  const auto backend = make_backend(c.backend);

  evaluation::PipelineConfig p(labels);
  p.topic_template = entailment::HypothesisTemplate(c.topic_template);
  p.document_template = entailment::HypothesisTemplate(c.document_template);
  p.topic_model = c.topic_model;
  p.embedder = embedder.get();
  p.backend = backend.get();
  p.normalize = c.normalize;
  p.max_tokens = c.max_tokens;

  const auto report = evaluation::run_experiment({id, c.k, *c.seed}, docs, p, a.baseline,
                                                 {a.single_rotation, a.parallel});
  out << report.to_table();
  if (!c.report_path.empty()) write_file(c.report_path, report.to_json() + "\n");
  return report.failed_rotations == report.rotations.size() ? 1 : 0;
}

// --- export-matrix -----------------------------------------------------------

int cmd_export(const std::string& model_path, std::size_t top_n, const std::string& output,
               std::ostream& out) {
  const auto model = zeroshot::TrainedModel::load(model_path);
  const auto csv = evaluation::export_entailment_matrix(model, top_n);
  if (output.empty() || output == "-") {
    out << csv;
  } else {
    write_file(output, csv);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"topiczero: zero-shot text classification through topic modeling"};
  app.require_subcommand(1);

  Overrides train_o;
  auto* train = app.add_subcommand("train", "fit a model on an unlabeled corpus");
  add_config_options(*train, train_o);
  train->add_option("-o,--output", train_o.output, "model artifact path, overrides the config");

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "label documents with a trained model");
  predict->add_option("-m,--model", pa.model, "model artifact")->required();
  predict->add_option("-i,--input", pa.input, "documents (JSONL or CSV)")->required();
  predict->add_option("-o,--output", pa.output, "predictions (JSONL)")->required();
  predict->add_option("--format", pa.format, "input format: jsonl or csv");
  predict->add_option("-c,--config", pa.config, "run configuration supplying the input fields");
  predict->add_option("--text-field", pa.text_fields, "input field(s) holding the text (default: text)");
  predict->add_option("--id-field", pa.id_field, "input field holding the document id (default: id)");
  predict->add_option("--embeddings", pa.embeddings, "vector file for a precomputed embedder");
  predict->add_option("--endpoint", pa.endpoint, "inference service URL for remote embedders");

  Overrides eval_o;
  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "run a cross-validated experiment");
  add_config_options(*evaluate, eval_o);
  evaluate->add_option("-e,--experiment", ea.experiment, "exp1, exp2, exp3 or exp4");
  evaluate->add_flag("--baseline", ea.baseline, "classify documents directly, without topics");
  evaluate->add_flag("--single-rotation", ea.single_rotation, "run only the first rotation");
  evaluate->add_flag("--parallel", ea.parallel, "run rotations concurrently");
  evaluate->add_option("-k,--folds", ea.k, "number of folds, overrides the config");
  evaluate->add_option("--max-tokens", ea.max_tokens, "baseline truncation, overrides the config");
  evaluate->add_option("-r,--report", ea.report, "JSON report path, overrides the config");

  std::string export_model, export_output;
  std::size_t top_n = 50;
  auto* exp = app.add_subcommand("export-matrix", "write the topic x label entailment matrix");
  exp->add_option("-m,--model", export_model, "model artifact")->required();
  exp->add_option("-n,--top-n", top_n, "number of largest topics")->check(CLI::PositiveNumber);
  exp->add_option("-o,--output", export_output, "CSV path, '-' for standard output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n" << failed->help();
    return e.get_exit_code() ? e.get_exit_code() : 2;
  }

  try {
    if (train->parsed()) return cmd_train(train_o, out, err);
    if (predict->parsed()) return cmd_predict(pa, out, err);
    if (evaluate->parsed()) return cmd_evaluate(eval_o, ea, out, err);
    if (exp->parsed()) return cmd_export(export_model, top_n, export_output, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace topiczero::cli
