#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ckp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a step or sample is requested but every node is PF.
class ExtinctError : public Error {
 public:
  ExtinctError() : Error("process is extinct: no PT node remains") {}
};

/// An explicit tree or a cached quantity violates a state invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration would exceed its configured branch budget.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::uint64_t budget, int attained_depth)
      : Error("enumeration budget of " + std::to_string(budget) +
              " branch visits exceeded at depth " + std::to_string(attained_depth)),
        budget_(budget),
        depth_(attained_depth) {}

  std::uint64_t budget() const noexcept { return budget_; }
  int attained_depth() const noexcept { return depth_; }

 private:
  std::uint64_t budget_;
  int depth_;
};

/// Invalid user configuration (bad flag value, unreadable file, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ckp
