#pragma once

#include <stdexcept>
#include <string>

namespace groupopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cluster-table count suggestion attached to configuration errors.
struct ClusterSuggestion {
  int minimum = 0;
  int recommended = 0;
};

/// Rejected RunConfig. `kind()` is a stable machine-readable tag.
class ConfigError : public Error {
 public:
  ConfigError(std::string kind, const std::string& message)
      : Error(message), kind_(std::move(kind)) {}
  ConfigError(std::string kind, const std::string& message, ClusterSuggestion suggestion)
      : Error(message), kind_(std::move(kind)), suggestion_(suggestion), has_suggestion_(true) {}

  const std::string& kind() const noexcept { return kind_; }
  bool has_suggestion() const noexcept { return has_suggestion_; }
  const ClusterSuggestion& suggestion() const noexcept { return suggestion_; }

 private:
  std::string kind_;
  ClusterSuggestion suggestion_{};
  bool has_suggestion_ = false;
};

class ClusterCapacityError : public ConfigError {
 public:
  ClusterCapacityError(const std::string& message, ClusterSuggestion suggestion)
      : ConfigError("ClusterCapacityError", message, suggestion) {}
};

class ManualConflictError : public ConfigError {
 public:
  explicit ManualConflictError(const std::string& message)
      : ConfigError("ManualConflictError", message) {}
};

class TableCountError : public ConfigError {
 public:
  explicit TableCountError(const std::string& message)
      : ConfigError("TableCountError", message) {}
};

/// Constraints that cannot be satisfied by any placement.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A panel or plan that breaks a structural invariant.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace groupopt
