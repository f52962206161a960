#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "topiczero/error.hpp"

namespace topiczero::cli {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void read_remote(const json& j, embedding::RemoteSettings& r) {
  if (j.contains("endpoint")) r.endpoint = j["endpoint"].get<std::string>();
  if (j.contains("batch_size")) r.batch_size = j["batch_size"].get<std::size_t>();
  if (j.contains("max_in_flight")) r.max_in_flight = j["max_in_flight"].get<std::size_t>();
  if (j.contains("max_retries")) r.max_retries = j["max_retries"].get<std::size_t>();
  if (j.contains("initial_backoff_ms")) {
    r.initial_backoff = std::chrono::milliseconds(j["initial_backoff_ms"].get<std::int64_t>());
  }
  if (j.contains("timeout_ms")) r.timeout = std::chrono::milliseconds(j["timeout_ms"].get<std::int64_t>());
}

void require_file(const std::filesystem::path& p, const std::string& what) {
  if (!std::filesystem::is_regular_file(p)) {
    throw InputError(what + " '" + p.string() + "' does not exist");
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config must be a JSON object");

  RunConfig c;
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("corpus")) {
      const auto& cj = j["corpus"];
      if (cj.contains("path")) c.corpus_path = resolve(base, cj["path"].get<std::string>());
      if (cj.contains("format")) c.corpus_format = corpus::parse_format(cj["format"].get<std::string>());
      if (cj.contains("text_fields")) c.ingest.text_fields = cj["text_fields"].get<std::vector<std::string>>();
      if (cj.contains("id_field")) c.ingest.id_field = cj["id_field"].get<std::string>();
      if (cj.contains("label_field")) c.ingest.label_field = cj["label_field"].get<std::string>();
    }
    if (j.contains("labels")) c.labels = j["labels"].get<std::vector<std::string>>();
    if (j.contains("templates")) {
      const auto& t = j["templates"];
      if (t.contains("document")) c.document_template = t["document"].get<std::string>();
      if (t.contains("topic")) c.topic_template = t["topic"].get<std::string>();
    }
    if (j.contains("embedder")) {
      const auto& e = j["embedder"];
      if (e.contains("kind")) c.embedder.kind = embedding::parse_embedder_kind(e["kind"].get<std::string>());
      if (e.contains("dim")) c.embedder.dim = e["dim"].get<std::size_t>();
      if (e.contains("path")) c.embedder.precomputed_path = resolve(base, e["path"].get<std::string>());
      read_remote(e, c.embedder.remote);
    }
    if (j.contains("topic_model")) c.topic_model = topic_model::TopicModelConfig::from_json(j["topic_model"].dump());
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      const auto kind = b.value("kind", std::string("lexical"));
      if (kind == "lexical") {
        c.backend.kind = BackendKind::lexical;
      } else if (kind == "remote") {
        c.backend.kind = BackendKind::remote;
      } else {
        throw InputError("unknown entailment backend '" + kind + "' (expected lexical or remote)");
      }
      if (b.contains("lexicon")) c.backend.lexicon = resolve(base, b["lexicon"].get<std::string>());
      read_remote(b, c.backend.remote);
    }
    if (j.contains("normalize")) c.normalize = j["normalize"].get<bool>();
    if (j.contains("max_tokens")) c.max_tokens = j["max_tokens"].get<std::size_t>();
    if (j.contains("k")) c.k = j["k"].get<std::size_t>();
    if (j.contains("output")) {
      const auto& o = j["output"];
      if (o.contains("model")) c.model_path = resolve(base, o["model"].get<std::string>());
      if (o.contains("report")) c.report_path = resolve(base, o["report"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

void validate(const RunConfig& c) {
  if (!c.seed) throw InputError("config must set a seed");
  if (c.corpus_path.empty()) throw InputError("config must name a corpus path");
  require_file(c.corpus_path, "corpus");
  if (c.labels.empty()) throw InputError("config must list at least one label");
  if (c.embedder.kind == embedding::EmbedderKind::precomputed) {
    require_file(c.embedder.precomputed_path, "embedding file");
  }
  if (c.backend.kind == BackendKind::lexical) {
    if (c.backend.lexicon.empty()) throw InputError("the lexical backend needs a lexicon path");
    require_file(c.backend.lexicon, "lexicon");
  } else if (c.backend.remote.endpoint.empty()) {
    throw InputError(std::string("the remote backend needs an endpoint (config or $") + kEndpointEnv + ")");
  }
  if (c.k < 2) throw InputError("k must be at least 2");
  c.embedder.validate();
  c.topic_model.validate();
}

void apply_endpoint_override(embedding::EmbedderSpec& spec) {
  if (const char* url = std::getenv(kEndpointEnv); url && *url) spec.remote.endpoint = url;
}

void apply_endpoint_override(RunConfig& c) {
  if (const char* url = std::getenv(kEndpointEnv); url && *url) {
    c.embedder.remote.endpoint = url;
    c.backend.remote.endpoint = url;
  }
}

}  // namespace topiczero::cli
