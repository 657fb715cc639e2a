#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "ckp/state.hpp"

namespace ckp {

/// Everything that happened in one transition.  Together with the state it
/// was applied to, it determines the next state exactly.
struct StepOutcome {
  NodeId parent = 0;
  Label child_label = Label::CT;
  bool checked = false;
  /// Nodes marked PF, ordered from the new node upward; empty if nothing found.
  std::vector<NodeId> marked_path;
  NodeId new_node = 0;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/// Walks v0 = start, v1 = parent(v0), ... for at most k edges (or to the
/// root).  Returns v0..vj for the smallest j with label(vj) != CT, or an
/// empty list when every visited node is CT.  Does not mutate.
std::vector<NodeId> check_path(const KnowledgeState& state, NodeId start, CheckDepth k);

/// The outcome that choosing (parent, label, checked) would produce, computed
/// on the current state without mutating it.
StepOutcome predict_outcome(const KnowledgeState& state, NodeId parent, Label label, bool checked);

/// What apply_choice changed, so it can be reverted exactly.
struct UndoRecord {
  NodeId new_node = 0;
  std::vector<std::pair<NodeId, Label>> relabeled;  // (node, previous label)
};

/// Deterministic transition for a fixed (parent, label, checked) choice.
UndoRecord apply_choice(KnowledgeState& state, NodeId parent, Label label, bool checked,
                        StepOutcome* outcome = nullptr);
void undo(KnowledgeState& state, const UndoRecord& record);

/// One random transition.  Draw order is fixed: parent, error coin, check
/// coin; both coins are always consumed.  Throws ExtinctError.
StepOutcome step(KnowledgeState& state, RandomStream& rng);

/// Sampling times for instrumentation.
class MetricsPlan {
 public:
  /// 0, 1, 2, 4, ... up to t_max, plus t_max itself.
  static MetricsPlan geometric(std::uint64_t t_max);
  static MetricsPlan explicit_times(std::vector<std::uint64_t> times);

  const std::vector<std::uint64_t>& times() const noexcept { return times_; }

 private:
  std::vector<std::uint64_t> times_;  // sorted, unique
};

struct RunOptions {
  std::uint64_t t_max = 0;
  bool stop_on_extinction = true;
  MetricsPlan plan = MetricsPlan::geometric(0);
};

struct RunResult {
  std::uint64_t steps = 0;  // insertions performed by this run
  bool extinct = false;
  std::optional<std::uint64_t> extinction_time;  // clock value when the last PT node died
  std::uint64_t final_digest_hash = 0;           // FNV-1a of KnowledgeState::digest()
};

/// Called at each plan time t with the state as of time t.
using Observer = std::function<void(std::uint64_t t, const KnowledgeState&)>;
/// Called after every transition.
using StepHook = std::function<void(const StepOutcome&, const KnowledgeState&)>;

/// Steps until t_max insertions or extinction.  Plan times are measured on
/// the state clock.  Without stop_on_extinction an extinct state is held
/// fixed and still reported at the remaining plan times.
RunResult run(KnowledgeState& state, RandomStream& rng, const RunOptions& options,
              const Observer& observe = {}, const StepHook& on_step = {});

std::uint64_t fnv1a(std::string_view bytes) noexcept;

struct WeightedOutcome {
  mpq_class probability;
  StepOutcome outcome;
};

/// Exact support of the one-step kernel: every (parent, label coin, check
/// coin) branch with positive probability, in parent-id order.
struct OutcomeDistribution {
  std::vector<WeightedOutcome> outcomes;
};

/// Throws ExtinctError on an extinct state.
OutcomeDistribution one_step_support(const KnowledgeState& state);

}  // namespace ckp
