#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace ckp {

/// A probability carried both exactly (for enumeration and drift
/// certificates) and as a double (for simulation coins).
class Probability {
 public:
  Probability() : exact_(0), approx_(0.0) {}
  explicit Probability(mpq_class value);

  /// Accepts "0.25", "1/4", "1e-3" and integers; rejects values outside [0, 1].
  static Probability parse(std::string_view text);

  const mpq_class& exact() const noexcept { return exact_; }
  double value() const noexcept { return approx_; }
  /// Canonical text: "p/q" or an integer.
  std::string str() const { return exact_.get_str(); }

  bool is_zero() const { return sgn(exact_) == 0; }
  bool is_one() const { return exact_ == 1; }
  Probability complement() const { return Probability(mpq_class(1 - exact_)); }

  friend bool operator==(const Probability& a, const Probability& b) {
    return a.exact_ == b.exact_;
  }

 private:
  mpq_class exact_;
  double approx_;
};

/// Check length k: a positive integer or unbounded (checks walk to the root).
class CheckDepth {
 public:
  static CheckDepth bounded(std::uint32_t k);
  static CheckDepth unbounded() { return CheckDepth(); }
  /// "inf" / "unbounded" or a positive integer.
  static CheckDepth parse(std::string_view text);

  bool is_bounded() const noexcept { return k_.has_value(); }
  /// Requires is_bounded().
  std::uint32_t value() const;
  std::string str() const;

  friend bool operator==(const CheckDepth&, const CheckDepth&) = default;

 private:
  CheckDepth() = default;
  explicit CheckDepth(std::uint32_t k) : k_(k) {}
  std::optional<std::uint32_t> k_;
};

/// (epsilon, p, k) of the process.
struct ModelParams {
  Probability epsilon;
  Probability p;
  CheckDepth k = CheckDepth::bounded(1);

  static ModelParams simple(Probability p, CheckDepth k) {
    return ModelParams{Probability(), std::move(p), k};
  }
};

/// (1-eps) max(-(2k-1)p/2 + 3, -p/2 + 3(1-p)) + 2 eps (1-p); negative values
/// put the general process in the eliminating regime.  Unbounded k drops the
/// first branch when p > 0.
mpq_class elimination_margin(const ModelParams& params);

/// (1-p)/2 - 3(1-eps)p; positive values give survival of the first CF subtree.
mpq_class survival_margin(const ModelParams& params);

/// 12/(2k-1) <= p <= 1/6, the range in which the combined potential drifts up.
bool combined_admissible(const Probability& p, const CheckDepth& k);

/// Exact parse of a decimal or fraction literal.
mpq_class parse_rational(std::string_view text);

}  // namespace ckp
