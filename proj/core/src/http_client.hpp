#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include "json.hpp"
#include "topiczero/embedding.hpp"

namespace topiczero::embedding {

// JSON-over-HTTP POST with a bound on concurrent requests and bounded
// exponential retry. Transport failures and 5xx responses are retried;
// 4xx responses and unparseable bodies are contract violations.
class HttpClient {
 public:
  explicit HttpClient(RemoteSettings settings);

  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  nlohmann::json get(const std::string& path) const;
  const RemoteSettings& settings() const noexcept { return settings_; }

 private:
  nlohmann::json send(const std::string& path, const std::string* payload) const;

  RemoteSettings settings_;
  mutable std::counting_semaphore<1024> in_flight_;
};

}  // namespace topiczero::embedding
