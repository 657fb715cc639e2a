#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "ckp/evolution.hpp"
#include "ckp/potentials.hpp"
#include "ckp/state.hpp"
#include "ckp/stats.hpp"

namespace ckp {

// ---- observables ----

struct MetricsRecord {
  std::uint64_t t = 0;
  std::uint64_t n_nodes = 0;
  std::uint64_t n_pt = 0;
  std::uint64_t n_true_pt = 0;
  std::uint64_t n_false_pt = 0;
  std::uint64_t n_pf = 0;
  std::uint64_t n_components = 0;
  std::uint64_t max_component = 0;
  std::uint64_t m_t = 0;  // max PT count over subtrees rooted at minimal False nodes
  std::uint64_t height = 0;
  std::uint64_t uni = 0;
  std::uint64_t iuni = 0;
  PotentialReading potentials;
  bool extinct = false;
};

/// Full-traversal observables.  Potentials are exact; pass
/// `with_potentials = false` to skip them on very long runs.
MetricsRecord metrics(const KnowledgeState& state, bool with_potentials = true);

struct UnivalentStats {
  std::uint64_t uni = 0;     // PT nodes with exactly one PT child
  std::uint64_t iuni = 0;    // univalent nodes without a univalent strict descendant
  std::uint64_t height = 0;  // max depth of a PT node (relative to the subtree root)
};

UnivalentStats univalent_stats(const KnowledgeState& state);
UnivalentStats univalent_stats(const KnowledgeState& state, NodeId subtree_root);

// ---- drift certificates ----

enum class Relation { Less, Greater, GreaterEq };

std::string_view to_string(Relation relation) noexcept;

struct DriftCertificate {
  PotentialKind potential = PotentialKind::Exp;
  std::string digest;
  mpq_class potential_value;
  mpq_class expected_delta;
  mpq_class bound;
  Relation relation = Relation::Less;
  bool satisfied = false;
  std::uint64_t support_size = 0;
  mpq_class min_delta;
  mpq_class max_delta;
  mpq_class max_abs_delta;
};

/// Exact E[potential(X_{t+1}) - potential(X_t) | X_t] over one_step_support,
/// compared against `bound`.  Throws ExtinctError on an extinct state and
/// Error when an exponential or leaves-and-components potential is zero.
DriftCertificate drift_certificate(const KnowledgeState& state, PotentialKind kind, const mpq_class& bound,
                                   Relation relation);

/// Same expectation conditioned on the parent lying in the block rooted at
/// `block_root`.
DriftCertificate conditional_drift_certificate(const KnowledgeState& state, PotentialKind kind, NodeId block_root,
                                               const mpq_class& bound, Relation relation);

/// Reachable states at geometric times from independent trajectories,
/// distinct by digest, non-extinct, and accepted by `keep`.  Trajectory i uses
/// RandomStream::split(seed, i).  Stops after `count` states or
/// `max_trajectories` trajectories.
std::vector<KnowledgeState> harvest_states(const ModelParams& params, const InitKind& init, std::size_t count,
                                           std::uint64_t t_max, std::uint64_t seed,
                                           const std::function<bool(const KnowledgeState&)>& keep = {},
                                           std::uint64_t max_trajectories = 1'000'000);

struct NamedState {
  std::string name;
  KnowledgeState state;
};

/// Hand-built extremal shapes: long paths, stars, brooms, caterpillars,
/// complete binary trees and freshly fractured forests.  With `interior_cf`
/// some internal nodes are CF (general-model states); the root label is CF.
std::vector<NamedState> extremal_states(const ModelParams& params, bool interior_cf = false);

// ---- trial simulation ----

enum class Tracking { Whole, FirstCF };

std::string_view to_string(Tracking tracking) noexcept;
Tracking parse_tracking(std::string_view text);

struct TrialSummary {
  std::uint64_t trial = 0;
  std::uint64_t steps = 0;
  bool extinct = false;
  std::optional<std::uint64_t> extinction_time;
  /// Tracked region (whole tree, or the first CF node's subtree) still has a
  /// PT node at t_max / 2 and at t_max.
  bool alive_half = false;
  bool alive_final = false;
  /// Clock value at which the tracked region lost its last PT node.
  std::optional<std::uint64_t> death_time;
  Tracking tracking = Tracking::Whole;
  std::optional<NodeId> tracked_root;
  MetricsRecord final_metrics;
  std::vector<MetricsRecord> series;  // at plan times, when requested
  /// Largest PT component size over all steps so far, parallel to `series`
  /// (filled when TrialOptions::track_running_max is set).
  std::vector<std::uint64_t> running_max;
  std::uint64_t digest_hash = 0;
};

struct TrialOptions {
  ModelParams params;
  InitKind init = SimpleRootCF{};
  std::uint64_t t_max = 0;
  bool stop_on_extinction = true;
  Tracking tracking = Tracking::Whole;
  std::optional<MetricsPlan> series_plan;  // record metrics at these times
  bool with_potentials = true;
  bool track_running_max = false;
  /// Called after each transition with the trial index (event logs).
  std::function<void(std::uint64_t trial, const StepOutcome&, const KnowledgeState&)> on_step;
};

TrialSummary simulate_trial(const TrialOptions& options, std::uint64_t seed, std::uint64_t trial);

struct SurvivalEstimate {
  std::uint64_t trials = 0;
  std::uint64_t t_max = 0;
  std::uint64_t survivors = 0;       // alive at t_max
  std::uint64_t survivors_half = 0;  // alive at t_max / 2
  double frequency = 0.0;
  double frequency_half = 0.0;
  double se = 0.0;
  double se_half = 0.0;
  Interval ci;
  Interval ci_half;
  std::uint64_t untracked = 0;          // FirstCF trials in which no CF node appeared
  std::vector<std::uint64_t> deaths;    // sorted death times of non-survivors
  std::map<std::uint64_t, std::uint64_t> death_histogram;  // power-of-two bin floor -> count

  /// Fraction of recorded deaths strictly before time t.
  double deaths_before(std::uint64_t t) const;
};

SurvivalEstimate summarize_survival(const std::vector<TrialSummary>& summaries, std::uint64_t t_max);

std::vector<TrialSummary> run_trials(const TrialOptions& options, std::uint64_t trials, std::uint64_t seed,
                                     unsigned threads);

SurvivalEstimate survival_estimate(const ModelParams& params, const InitKind& init, std::uint64_t trials,
                                   std::uint64_t t_max, std::uint64_t seed, unsigned threads = 1,
                                   Tracking tracking = Tracking::Whole);

enum class Regime { Eliminating, Surviving, Inconclusive };
std::string_view to_string(Regime regime) noexcept;

/// Surviving: Wilson lower bound at t_max above 0 and frequency(t_max) at
/// least frequency(t_max/2) - 2 SE.  Eliminating: Wilson upper bound below
/// 0.01 and at least 99% of deaths before t_max / 2.  Needs >= 100 trials.
Regime classify_regime(const SurvivalEstimate& estimate);

/// Mean and SE of the final n_false_pt / n_pt over trials with n_pt > 0.
MeanSE reliability_ratio(const std::vector<TrialSummary>& summaries);

// ---- tau statistics ----

struct TauStatistics {
  std::uint64_t trials = 0;
  std::uint64_t cap = 0;
  std::vector<std::uint64_t> tau;  // event times of uncensored trials, sorted
  std::uint64_t censored = 0;      // no event by cap

  /// Empirical P(tau > t) for t < cap.
  double tail(std::uint64_t t) const;
  /// Empirical P(tau = t).
  double mass(std::uint64_t t) const;
  /// OLS of log tail(t) on log t over `points` log-spaced times in [lo, hi].
  LinearFit tail_slope(std::uint64_t lo, std::uint64_t hi, int points = 21) const;
};

/// Univalent initialization of length `chain_length`, simple dynamics with
/// check depth 2.  tau is the first clock value at which node 1 (the single
/// child of the PF root) has a second PT child or is PF.
TauStatistics tau_statistics(const Probability& p, std::uint32_t chain_length, std::uint64_t trials,
                             std::uint64_t cap, std::uint64_t seed, unsigned threads = 1);

// ---- Polya urn ----

struct UrnMoments {
  mpq_class mean;
  mpq_class second_moment;
};

/// Start with t0 - 1 black balls and 1 white; each draw duplicates the drawn
/// ball.  X_t counts white draws among the first t.
UrnMoments polya_urn_moments(std::uint64_t t0, std::uint64_t t);
/// Exact P(X_t >= x).
mpq_class polya_urn_tail(std::uint64_t t0, std::uint64_t t, std::uint64_t x);
std::uint64_t polya_urn_sample(std::uint64_t t0, std::uint64_t t, RandomStream& rng);

}  // namespace ckp
