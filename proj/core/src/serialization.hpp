#pragma once

// nlohmann::json conversions shared by the artifact writers. Kept out of the
// public headers so installed consumers never see json.hpp.

#include "json.hpp"
#include "topiczero/embedding.hpp"
#include "topiczero/topic_model.hpp"

namespace topiczero::detail {

nlohmann::json embedder_to_json(const embedding::EmbedderSpec& spec);
embedding::EmbedderSpec embedder_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const topic_model::TopicModelConfig& config);
topic_model::TopicModelConfig config_from_json(const nlohmann::json& j);

nlohmann::json topic_model_to_json(const topic_model::FittedTopicModel& model);
topic_model::FittedTopicModel topic_model_from_json(const nlohmann::json& j);

/// Checks the "format"/"version" header of an artifact.
void check_header(const nlohmann::json& j, std::string_view format, int version);

}  // namespace topiczero::detail
