#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topiczero {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad records, invalid configuration, violated preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A lookup by key (document id, label name) found nothing.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A backend answered, but the answer breaks its contract (wrong length,
/// probabilities outside [0, 1], bad dimension). Never retried.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// The remote service could not be reached or kept failing after retries.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, std::string endpoint,
                 std::size_t attempts, int last_status)
      : Error(message),
        endpoint_(std::move(endpoint)),
        attempts_(attempts),
        last_status_(last_status) {}

  const std::string& endpoint() const noexcept { return endpoint_; }
  std::size_t attempts() const noexcept { return attempts_; }
  /// HTTP status of the last attempt, or -1 when no response arrived.
  int last_status() const noexcept { return last_status_; }

 private:
  std::string endpoint_;
  std::size_t attempts_;
  int last_status_;
};

}  // namespace topiczero
