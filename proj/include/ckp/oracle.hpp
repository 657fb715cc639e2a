#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "ckp/error.hpp"
#include "ckp/state.hpp"

namespace ckp {

struct TrajectoryAtom {
  mpq_class probability;
  std::string digest;
  std::uint64_t terminal_time = 0;         // clock of the final tree
  std::optional<std::uint64_t> extinct_at;  // clock at which the last PT node died
};

struct Enumeration {
  std::uint64_t horizon = 0;
  std::vector<TrajectoryAtom> atoms;  // sorted by digest, probabilities > 0
  std::uint64_t branch_visits = 0;
  mpq_class expected_phi_exp;
  mpq_class expected_phi_lc;
  mpq_class survival_probability;    // some PT node remains
  mpq_class error_free_probability;  // no False node is PT

  mpq_class total_probability() const;
  const TrajectoryAtom* find(const std::string& digest) const;
};

constexpr std::uint64_t kDefaultBranchBudget = 100'000'000;

/// Exact distribution of the state after `horizon` steps.  Every branch of
/// one_step_support is expanded level by level; equal trees reached by
/// different histories are merged.  Extinct states absorb.  Throws
/// BudgetExceeded once more than `budget` branches would be visited.
Enumeration enumerate(const KnowledgeState& start, std::uint64_t horizon,
                      std::uint64_t budget = kDefaultBranchBudget);
Enumeration enumerate(const ModelParams& params, const InitKind& init, std::uint64_t horizon,
                      std::uint64_t budget = kDefaultBranchBudget);

using DigestCounts = std::map<std::string, std::uint64_t>;

/// Final digests of `samples` simulated runs of `horizon` steps; run i uses
/// RandomStream::split(seed, i).
DigestCounts sample_digests(const ModelParams& params, const InitKind& init, std::uint64_t horizon,
                            std::uint64_t samples, std::uint64_t seed, unsigned threads = 1);

struct Comparison {
  std::uint64_t samples = 0;
  std::uint64_t support_size = 0;
  std::uint64_t observed_support = 0;
  double total_variation = 0.0;
  double expected_total_variation = 0.0;  // mean TV of an exact sampler at this n
  double chi_square = 0.0;
  std::uint64_t dof = 0;
  double p_value = 1.0;
};

/// Raised when a simulated digest has zero exact probability.
class SupportViolation : public Error {
 public:
  explicit SupportViolation(const std::string& digest)
      : Error("simulated state outside the exact support: " + digest), digest_(digest) {}
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

/// TV distance and chi-square goodness of fit; atoms with expected count
/// below 5 are pooled into one bin.  Throws Error on an empty sample and
/// SupportViolation on an out-of-support digest.
Comparison compare(const DigestCounts& empirical, const Enumeration& exact);

/// E[TV] between the exact distribution and the empirical one of n draws.
double expected_total_variation(const Enumeration& exact, std::uint64_t samples);

/// One JSON object per atom.
void write_atoms_jsonl(std::ostream& out, const Enumeration& exact);

}  // namespace ckp
