#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lsqtobit {

/// Machine-readable error categories. The CLI maps each one to a distinct
/// exit code and prints the category name on stderr.
enum class ErrorCategory {
  Domain,               // argument outside the mathematical domain
  Config,               // invalid configuration or command line
  Parse,                // malformed input file
  Data,                 // well-formed input that cannot be modelled
  RankDeficient,        // collinear design columns
  NonConvergence,       // optimizer did not reach the gradient tolerance
  SingularInformation,  // -H not positive definite at the estimate
  Io,                   // filesystem failure
};

std::string_view category_name(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::Domain, what) {}
};

}  // namespace lsqtobit
