#include "http_client.hpp"

#include <algorithm>
#include <thread>

#include "httplib.h"
#include "topiczero/error.hpp"

namespace topiczero::embedding {
namespace {

std::ptrdiff_t clamp_in_flight(std::size_t n) {
  return static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(n, 1, 1024));
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

HttpClient::HttpClient(RemoteSettings settings)
    : settings_(std::move(settings)), in_flight_(clamp_in_flight(settings_.max_in_flight)) {
  if (settings_.endpoint.empty()) throw InputError("remote backend requires an endpoint");
}

nlohmann::json HttpClient::post(const std::string& path, const nlohmann::json& body) const {
  const std::string payload = body.dump();
  return send(path, &payload);
}

nlohmann::json HttpClient::get(const std::string& path) const { return send(path, nullptr); }

nlohmann::json HttpClient::send(const std::string& path, const std::string* payload) const {
  const std::string where = settings_.endpoint + path;
  auto backoff = settings_.initial_backoff;
  int last_status = -1;
  std::string last_error;
  const std::size_t attempts = settings_.max_retries + 1;

  for (std::size_t attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      SemaphoreGuard guard(in_flight_);
      httplib::Client client(settings_.endpoint);
      client.set_connection_timeout(settings_.timeout);
      client.set_read_timeout(settings_.timeout);
      client.set_write_timeout(settings_.timeout);
      res = payload ? client.Post(path, *payload, "application/json") : client.Get(path);
    }
    if (!res) {
      last_status = -1;
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status != 200) {
      throw ContractViolation(where + " rejected the request with HTTP " +
                              std::to_string(res->status) + ": " + res->body);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::parse_error& e) {
        throw ContractViolation(where + " returned malformed JSON: " + e.what());
      }
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError("request to " + where + " failed after " + std::to_string(attempts) +
                           " attempts: " + last_error,
                       settings_.endpoint, attempts, last_status);
}

}  // namespace topiczero::embedding
