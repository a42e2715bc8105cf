#pragma once

#include <stdexcept>
#include <string>

namespace reclab {

// Malformed input: bad matrix, inadmissible word, empty parameter range.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A point or argument outside the domain of a map or of a conditional law.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// An enumeration or DP would exceed its configured size budget.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reclab
