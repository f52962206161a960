#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topiczero::embedding {

/// Dense document vector. Entries are finite; vectors produced by an
/// Embedder are L2-normalized.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const noexcept;

  bool operator==(const Embedding&) const = default;

 private:
  std::vector<double> values_;
};

/// Returns `v` scaled to unit L2 norm. Throws on a zero or non-finite vector.
Embedding normalized(std::vector<double> v);

/// Cosine of the angle between `a` and `b`, clamped to [-1, 1].
double cosine_similarity(const Embedding& a, const Embedding& b);

enum class EmbedderKind { hashing, remote, precomputed };

std::string_view to_string(EmbedderKind kind) noexcept;
EmbedderKind parse_embedder_kind(std::string_view name);

/// Connection settings shared by both remote backends.
struct RemoteSettings {
  std::string endpoint;  // e.g. "http://127.0.0.1:8000"
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  std::size_t max_retries = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds timeout{60000};
};

/// GET /health of the inference service.
struct ServiceHealth {
  std::string status;
  /// Role ("embedding", "entailment") -> model id.
  std::map<std::string, std::string> models;
  std::optional<std::size_t> context_limit;

  bool ok() const noexcept { return status == "ok"; }
};

ServiceHealth check_health(const RemoteSettings& settings);

struct EmbedderSpec {
  EmbedderKind kind = EmbedderKind::hashing;
  std::size_t dim = 512;
  RemoteSettings remote;
  std::filesystem::path precomputed_path;

  void validate() const;
  std::string to_json() const;
  static EmbedderSpec from_json(std::string_view json);
};

struct EmbedInput {
  std::string_view id;
  std::string_view text;
};

class Embedder {
 public:
  virtual ~Embedder() = default;

  /// One unit vector of length spec().dim per input, in input order.
  virtual std::vector<Embedding> embed(std::span<const EmbedInput> inputs) const = 0;
  virtual const EmbedderSpec& spec() const noexcept = 0;

  Embedding embed_one(std::string_view id, std::string_view text) const;
};

/// Signed feature hashing of lowercase word unigrams, no truncation.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(EmbedderSpec spec);
  std::vector<Embedding> embed(std::span<const EmbedInput> inputs) const override;
  const EmbedderSpec& spec() const noexcept override { return spec_; }

  Embedding embed_text(std::string_view text) const;

 private:
  EmbedderSpec spec_;
};

/// Vectors looked up by document id from a JSONL file of {"id", "vector"}.
class PrecomputedEmbedder final : public Embedder {
 public:
  explicit PrecomputedEmbedder(EmbedderSpec spec);
  PrecomputedEmbedder(EmbedderSpec spec, std::unordered_map<std::string, Embedding> table);

  std::vector<Embedding> embed(std::span<const EmbedInput> inputs) const override;
  const EmbedderSpec& spec() const noexcept override { return spec_; }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  EmbedderSpec spec_;
  std::unordered_map<std::string, Embedding> table_;
};

class HttpClient;

/// Client for the sidecar's POST /embed. Inputs are split into batches of
/// remote.batch_size which are sent concurrently, at most
/// remote.max_in_flight at a time per embedder instance.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderSpec spec);
  ~RemoteEmbedder() override;

  std::vector<Embedding> embed(std::span<const EmbedInput> inputs) const override;
  const EmbedderSpec& spec() const noexcept override { return spec_; }

 private:
  std::vector<Embedding> embed_batch(std::span<const EmbedInput> batch) const;

  EmbedderSpec spec_;
  std::unique_ptr<HttpClient> client_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec);

/// Convenience: builds the backend for `spec` and embeds `inputs`.
std::vector<Embedding> embed(std::span<const EmbedInput> inputs, const EmbedderSpec& spec);

}  // namespace topiczero::embedding
