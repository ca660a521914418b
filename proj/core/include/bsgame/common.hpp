#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsgame {

// One schema violation, addressed by a JSON-style path such as "problem.D1".
struct FieldError {
  std::string path;
  std::string message;
};

// Configuration / schema failure. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::string msg) : std::runtime_error(std::move(msg)) {}
  ConfigError(std::string msg, std::vector<FieldError> fields)
      : std::runtime_error(std::move(msg)), fields_(std::move(fields)) {}
  const std::vector<FieldError>& fields() const { return fields_; }

 private:
  std::vector<FieldError> fields_;
};

// Numeric failure (divergence, NaN propagation, unusable factorization).
// CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A verification check landed outside tolerance. CLI maps this to exit code 4.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Warning sink. Defaults to stderr; tests may swap it out.
using WarnHandler = std::function<void(const std::string&)>;
void set_warn_handler(WarnHandler handler);
void warn(const std::string& message);

}  // namespace bsgame
