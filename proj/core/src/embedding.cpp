#include "topiczero/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "http_client.hpp"
#include "json.hpp"
#include "serialization.hpp"
#include "topiczero/error.hpp"
#include "topiczero/text.hpp"

namespace topiczero::embedding {

using nlohmann::json;

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw ContractViolation("embedding has a non-finite entry");
  }
}

double Embedding::norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

Embedding normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw ContractViolation("embedding has a non-finite entry");
    s += x * x;
  }
  if (s == 0.0) throw InputError("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(s);
  for (double& x : v) x *= inv;
  return Embedding(std::move(v));
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw InputError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw InputError("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string_view to_string(EmbedderKind kind) noexcept {
  switch (kind) {
    case EmbedderKind::hashing: return "hashing";
    case EmbedderKind::remote: return "remote";
    case EmbedderKind::precomputed: return "precomputed";
  }
  return "hashing";
}

EmbedderKind parse_embedder_kind(std::string_view name) {
  if (name == "hashing") return EmbedderKind::hashing;
  if (name == "remote") return EmbedderKind::remote;
  if (name == "precomputed") return EmbedderKind::precomputed;
  throw InputError("unknown embedder kind '" + std::string(name) + "'");
}

void EmbedderSpec::validate() const {
  if (dim < 2) throw InputError("embedder dim must be at least 2");
  if (kind == EmbedderKind::remote && remote.endpoint.empty()) {
    throw InputError("remote embedder requires an endpoint");
  }
  if (kind == EmbedderKind::precomputed && precomputed_path.empty()) {
    throw InputError("precomputed embedder requires a vector file path");
  }
}

std::string EmbedderSpec::to_json() const { return detail::embedder_to_json(*this).dump(); }

EmbedderSpec EmbedderSpec::from_json(std::string_view text) {
  try {
    return detail::embedder_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed embedder spec: ") + e.what());
  }
}

Embedding Embedder::embed_one(std::string_view id, std::string_view text) const {
  const EmbedInput input{id, text};
  auto out = embed(std::span<const EmbedInput>(&input, 1));
  return std::move(out.front());
}

// --- hashing --------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void add_hashed(std::vector<double>& v, std::string_view token) {
  const auto h = fnv1a(token);
  const double sign = (h >> 63) ? -1.0 : 1.0;
  v[h % v.size()] += sign;
}

}  // namespace

HashingEmbedder::HashingEmbedder(EmbedderSpec spec) : spec_(std::move(spec)) {
  spec_.kind = EmbedderKind::hashing;
  spec_.validate();
}

Embedding HashingEmbedder::embed_text(std::string_view text) const {
  std::vector<double> v(spec_.dim, 0.0);
  for (const auto& tok : text::word_tokens(text)) add_hashed(v, tok);
  // Punctuation-only text, or tokens whose signed buckets cancel out: fall
  // back to hashing the whole trimmed text so the vector stays defined.
  if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
    const auto raw = text::trim(text);
    if (raw.empty()) throw InputError("cannot embed empty text");
    add_hashed(v, raw);
  }
  return normalized(std::move(v));
}

std::vector<Embedding> HashingEmbedder::embed(std::span<const EmbedInput> inputs) const {
  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(embed_text(in.text));
  return out;
}

// --- precomputed ----------------------------------------------------------

namespace {

std::unordered_map<std::string, Embedding> load_vectors(const std::filesystem::path& path,
                                                        std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vector file '" + path.string() + "'");
  std::unordered_map<std::string, Embedding> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const std::string where = path.string() + " line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(where + ": malformed JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("vector")) {
      throw InputError(where + ": expected an object with 'id' and 'vector'");
    }
    std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    auto values = j["vector"].get<std::vector<double>>();
    if (values.size() != dim) {
      throw InputError(where + ": vector has dimension " + std::to_string(values.size()) +
                       ", expected " + std::to_string(dim));
    }
    if (!table.emplace(id, normalized(std::move(values))).second) {
      throw InputError(where + ": duplicate id '" + id + "'");
    }
  }
  return table;
}

}  // namespace

PrecomputedEmbedder::PrecomputedEmbedder(EmbedderSpec spec) : spec_(std::move(spec)) {
  spec_.kind = EmbedderKind::precomputed;
  spec_.validate();
  table_ = load_vectors(spec_.precomputed_path, spec_.dim);
}

PrecomputedEmbedder::PrecomputedEmbedder(EmbedderSpec spec,
                                         std::unordered_map<std::string, Embedding> table)
    : spec_(std::move(spec)), table_(std::move(table)) {
  spec_.kind = EmbedderKind::precomputed;
  if (spec_.dim < 2) throw InputError("embedder dim must be at least 2");
  for (auto& [id, e] : table_) {
    if (e.dim() != spec_.dim) throw InputError("vector for '" + id + "' has the wrong dimension");
    e = normalized(std::vector<double>(e.values().begin(), e.values().end()));
  }
}

std::vector<Embedding> PrecomputedEmbedder::embed(std::span<const EmbedInput> inputs) const {
  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    auto it = table_.find(std::string(in.id));
    if (it == table_.end()) {
      throw LookupError("no precomputed vector for document id '" + std::string(in.id) + "'");
    }
    out.push_back(it->second);
  }
  return out;
}

// --- remote ---------------------------------------------------------------

ServiceHealth check_health(const RemoteSettings& settings) {
  auto once = settings;
  once.max_retries = 0;
  const json j = HttpClient(once).get("/health");
  const std::string where = settings.endpoint + "/health";
  if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) {
    throw ContractViolation(where + ": response lacks a 'status' string");
  }
  ServiceHealth h;
  h.status = j["status"].get<std::string>();
  if (j.contains("models")) {
    if (!j["models"].is_object()) throw ContractViolation(where + ": 'models' must be an object");
    for (const auto& [role, id] : j["models"].items()) {
      if (!id.is_string()) throw ContractViolation(where + ": model id for '" + role + "' is not a string");
      h.models[role] = id.get<std::string>();
    }
  }
  if (j.contains("context_limit")) {
    if (!j["context_limit"].is_number_unsigned()) {
      throw ContractViolation(where + ": 'context_limit' must be a non-negative integer");
    }
    h.context_limit = j["context_limit"].get<std::size_t>();
  }
  return h;
}

RemoteEmbedder::RemoteEmbedder(EmbedderSpec spec)
    : spec_(std::move(spec)) {
  spec_.kind = EmbedderKind::remote;
  spec_.validate();
  if (spec_.remote.batch_size == 0) throw InputError("remote batch_size must be positive");
  client_ = std::make_unique<HttpClient>(spec_.remote);
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::vector<Embedding> RemoteEmbedder::embed_batch(std::span<const EmbedInput> batch) const {
  json texts = json::array();
  for (const auto& in : batch) {
    if (text::trim(in.text).empty()) throw InputError("cannot embed empty text");
    texts.push_back(std::string(in.text));
  }
  const json response = client_->post("/embed", json{{"texts", std::move(texts)}});
  const std::string where = spec_.remote.endpoint + "/embed";
  if (!response.is_object() || !response.contains("vectors") || !response["vectors"].is_array()) {
    throw ContractViolation(where + ": response lacks a 'vectors' array");
  }
  const auto& vectors = response["vectors"];
  if (vectors.size() != batch.size()) {
    throw ContractViolation(where + ": expected " + std::to_string(batch.size()) +
                            " vectors, got " + std::to_string(vectors.size()));
  }
  if (response.contains("dim") && response["dim"].get<std::size_t>() != spec_.dim) {
    throw ContractViolation(where + ": service dim " + response["dim"].dump() +
                            " does not match configured dim " + std::to_string(spec_.dim));
  }
  std::vector<Embedding> out;
  out.reserve(batch.size());
  for (const auto& v : vectors) {
    std::vector<double> values;
    try {
      values = v.get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ContractViolation(where + ": vectors must be arrays of numbers");
    }
    if (values.size() != spec_.dim) {
      throw ContractViolation(where + ": vector of length " + std::to_string(values.size()) +
                              ", expected " + std::to_string(spec_.dim));
    }
    try {
      out.push_back(normalized(std::move(values)));
    } catch (const InputError&) {
      throw ContractViolation(where + ": service returned a zero vector");
    }
  }
  return out;
}

std::vector<Embedding> RemoteEmbedder::embed(std::span<const EmbedInput> inputs) const {
  const std::size_t bs = spec_.remote.batch_size;
  const std::size_t n_batches = (inputs.size() + bs - 1) / bs;
  std::vector<std::vector<Embedding>> results(n_batches);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_batches) return;
      try {
        results[b] = embed_batch(inputs.subspan(b * bs, std::min(bs, inputs.size() - b * bs)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_batches);
        return;
      }
    }
  };
  {
    const std::size_t n_workers = std::min(std::max<std::size_t>(spec_.remote.max_in_flight, 1), n_batches);
    std::vector<std::jthread> workers;
    for (std::size_t i = 1; i < n_workers; ++i) workers.emplace_back(worker);
    if (n_workers > 0) worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Embedding> out;
  out.reserve(inputs.size());
  for (auto& batch : results) {
    for (auto& e : batch) out.push_back(std::move(e));
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec) {
  switch (spec.kind) {
    case EmbedderKind::hashing: return std::make_unique<HashingEmbedder>(spec);
    case EmbedderKind::remote: return std::make_unique<RemoteEmbedder>(spec);
    case EmbedderKind::precomputed: return std::make_unique<PrecomputedEmbedder>(spec);
  }
  throw InputError("unknown embedder kind");
}

std::vector<Embedding> embed(std::span<const EmbedInput> inputs, const EmbedderSpec& spec) {
  return make_embedder(spec)->embed(inputs);
}

}  // namespace topiczero::embedding
