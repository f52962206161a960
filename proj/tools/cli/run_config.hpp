#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "topiczero/corpus.hpp"
#include "topiczero/embedding.hpp"
#include "topiczero/entailment.hpp"
#include "topiczero/topic_model.hpp"

namespace topiczero::cli {

inline constexpr const char* kEndpointEnv = "TOPICZERO_SIDECAR_URL";

enum class BackendKind { lexical, remote };

struct BackendConfig {
  BackendKind kind = BackendKind::lexical;
  std::filesystem::path lexicon;
  embedding::RemoteSettings remote;
};

// Everything a command needs, loaded from one JSON document. Relative paths
// resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path corpus_path;
  std::optional<corpus::Format> corpus_format;
  corpus::LoadOptions ingest;
  std::vector<std::string> labels;
  std::string document_template{entailment::kDocumentTemplate};
  std::string topic_template{entailment::kTopicTemplate};
  embedding::EmbedderSpec embedder;
  topic_model::TopicModelConfig topic_model;
  BackendConfig backend;
  bool normalize = true;
  std::size_t max_tokens = 512;
  std::optional<std::uint64_t> seed;
  std::size_t k = 5;
  std::filesystem::path model_path = "model.json";
  std::filesystem::path report_path;
};

RunConfig parse_run_config(std::string_view json, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Checks mandatory fields and that referenced files exist.
void validate(const RunConfig& config);

/// Replaces remote endpoints with $TOPICZERO_SIDECAR_URL when set.
void apply_endpoint_override(RunConfig& config);
void apply_endpoint_override(embedding::EmbedderSpec& spec);

}  // namespace topiczero::cli
