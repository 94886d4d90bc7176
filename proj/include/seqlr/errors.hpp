#pragma once

#include <stdexcept>
#include <string>

namespace seqlr {

// Failure categories map one-to-one onto the CLI exit codes.
enum class ErrorCategory {
  Config = 1,
  InvalidSystem = 2,
  NonConvergence = 3,
  Tolerance = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::Config, w) {}
};

struct InvalidSystem : Error {
  explicit InvalidSystem(const std::string& w) : Error(ErrorCategory::InvalidSystem, w) {}
};
struct NotExpanding : InvalidSystem {
  explicit NotExpanding(const std::string& w) : InvalidSystem("NotExpanding: " + w) {}
};
struct KickTooLarge : InvalidSystem {
  explicit KickTooLarge(const std::string& w) : InvalidSystem("KickTooLarge: " + w) {}
};
struct DegreeMismatch : InvalidSystem {
  explicit DegreeMismatch(const std::string& w) : InvalidSystem("DegreeMismatch: " + w) {}
};
struct DimensionMismatch : InvalidSystem {
  explicit DimensionMismatch(const std::string& w) : InvalidSystem("DimensionMismatch: " + w) {}
};
struct WindowExceeded : InvalidSystem {
  explicit WindowExceeded(const std::string& w) : InvalidSystem("WindowExceeded: " + w) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& w) : Error(ErrorCategory::NonConvergence, w) {}
};
struct NoConvergence : ConvergenceError {
  explicit NoConvergence(const std::string& w) : ConvergenceError("NoConvergence: " + w) {}
};
struct NotConverged : ConvergenceError {
  explicit NotConverged(const std::string& w) : ConvergenceError("NotConverged: " + w) {}
};
struct MNotFound : ConvergenceError {
  explicit MNotFound(const std::string& w) : ConvergenceError("MNotFound: " + w) {}
};

struct ToleranceError : Error {
  explicit ToleranceError(const std::string& w) : Error(ErrorCategory::Tolerance, w) {}
};
struct TailNotSmall : ToleranceError {
  TailNotSmall(const std::string& w, int required)
      : ToleranceError("TailNotSmall: " + w), required_order(required) {}
  int required_order;
};

}  // namespace seqlr
