#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "ckp/decomposition.hpp"
#include "ckp/state.hpp"

namespace ckp {

enum class PotentialKind { Exp, LC, Combined, Reliability };

std::string_view to_string(PotentialKind kind) noexcept;
PotentialKind parse_potential(std::string_view text);

// Exponential potential: sum over blocks of (1 + deg_pt(v)) * 2^depth(v),
// depth measured from the block root.  deg_pt counts PT children even when
// they lie outside the block.
mpz_class block_phi_exp(const KnowledgeState& state, const Block& block);
mpz_class phi_exp(const KnowledgeState& state);

// Leaves-and-components potential: per block, 1 if it is a singleton,
// otherwise 1 + sum over block leaves of 1 / (cf_children + 1).
mpq_class block_phi_lc(const Block& block);
mpq_class phi_lc(const KnowledgeState& state);

mpz_class component_phi_exp(const KnowledgeState& state, const PTComponent& component);
/// |C| times the exponential sum of the component.
mpz_class phi_exp_adapted(const KnowledgeState& state, const PTComponent& component);

/// 1 / (5 (k+1)^2 2^k).
mpq_class combined_scale(std::uint32_t k);
/// phi_lc minus combined_scale(k) times the adapted potentials of the
/// components larger than k.  k must be bounded.
mpq_class phi_combined(const KnowledgeState& state, CheckDepth k);

/// eps (1 - p) / (1 - eps); throws Error when eps = 1.
mpq_class reliability_coefficient(const Probability& epsilon, const Probability& p);
/// coefficient * #(True PT nodes) - phi_exp.
mpq_class phi_reliability(const KnowledgeState& state, const Probability& epsilon, const Probability& p);

/// Potential selected by kind, using the state's own parameters.
mpq_class evaluate(const KnowledgeState& state, PotentialKind kind);

struct PotentialReading {
  std::uint64_t t = 0;
  mpz_class phi_exp;
  mpq_class phi_lc;
  std::vector<mpz_class> phi_exp_adapted;  // one per PT component, in root order
  std::optional<mpq_class> phi_combined;     // absent when k is unbounded
  std::optional<mpq_class> phi_reliability;  // absent when eps = 1
};

PotentialReading read_potentials(const KnowledgeState& state);

/// Double-precision exponential potential for instrumentation-only runs.
struct ApproxValue {
  double value = 0.0;
  bool overflow = false;
};
ApproxValue phi_exp_approx(const KnowledgeState& state);

/// Exact change of one potential under a single (parent, label, check)
/// choice, evaluated only on the blocks a step can touch: the parent's block,
/// the block of the parent of the topmost marked node, and the new node.
/// Equals evaluate(after) - evaluate(before).
class LocalDelta {
 public:
  LocalDelta(const KnowledgeState& state, PotentialKind kind);

  mpq_class delta(NodeId parent, Label label, bool checked);

  /// Block root of a node, or BlockTracker::kNoBlock.
  NodeId block_of(NodeId v) const { return block_of_[v]; }

 private:
  mpq_class unit_value(const Block& block) const;

  KnowledgeState scratch_;
  PotentialKind kind_;
  std::vector<NodeId> block_of_;
  std::vector<std::size_t> block_index_;  // by root id
  std::vector<Block> blocks_;
  std::vector<mpq_class> block_values_;
  std::vector<bool> truth_;
  mpq_class coefficient_;
  std::optional<std::uint32_t> k_;
};

}  // namespace ckp
