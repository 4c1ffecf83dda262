#ifndef ICV_ERROR_H_
#define ICV_ERROR_H_

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace icv {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kIo,
  kParse,
  kValidation,
  kConflict,
  kFailedPrecondition,
  kBackend,
  kUndefined,
};

const char *ErrorCodeName(ErrorCode code);

// Base error for everything the library throws. `details` carries structured
// context (offending record, original session, ...) for the HTTP error body.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message,
        nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const { return code_; }
  const nlohmann::json &details() const { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

// Failure talking to a concept backend. Never swallowed into an empty result.
class BackendError : public Error {
 public:
  BackendError(std::string endpoint, std::string cause)
      : Error(ErrorCode::kBackend,
              "backend " + endpoint + ": " + cause,
              {{"endpoint", endpoint}, {"cause", cause}}),
        endpoint_(std::move(endpoint)),
        cause_(std::move(cause)) {}

  const std::string &endpoint() const { return endpoint_; }
  const std::string &cause() const { return cause_; }

 private:
  std::string endpoint_;
  std::string cause_;
};

}  // namespace icv

#endif  // ICV_ERROR_H_
