#include "ckp/evolution.hpp"

#include <algorithm>

#include "ckp/error.hpp"

namespace ckp {

std::vector<NodeId> check_path(const KnowledgeState& state, NodeId start, CheckDepth k) {
  std::vector<NodeId> path;
  NodeId v = start;
  const bool bounded = k.is_bounded();
  const std::uint64_t max_edges = bounded ? k.value() : 0;
  for (std::uint64_t edges = 0;; ++edges) {
    path.push_back(v);
    if (state.label(v) != Label::CT) return path;
    const auto& parent = state.node(v).parent;
    if (!parent || (bounded && edges == max_edges)) return {};
    v = *parent;
  }
}

StepOutcome predict_outcome(const KnowledgeState& state, NodeId parent, Label label, bool checked) {
  StepOutcome out;
  out.parent = parent;
  out.child_label = label;
  out.checked = checked;
  out.new_node = static_cast<NodeId>(state.size());
  if (!checked) return out;
  if (label != Label::CT) {
    out.marked_path = {out.new_node};
    return out;
  }
  // The new node is CT; continue the walk at its parent with k - 1 edges left.
  const CheckDepth k = state.params().k;
  if (k.is_bounded() && k.value() == 1) {
    if (state.label(parent) != Label::CT) out.marked_path = {out.new_node, parent};
    return out;
  }
  const CheckDepth rest = k.is_bounded() ? CheckDepth::bounded(k.value() - 1) : k;
  auto upper = check_path(state, parent, rest);
  if (!upper.empty()) {
    out.marked_path.reserve(upper.size() + 1);
    out.marked_path.push_back(out.new_node);
    out.marked_path.insert(out.marked_path.end(), upper.begin(), upper.end());
  }
  return out;
}

UndoRecord apply_choice(KnowledgeState& state, NodeId parent, Label label, bool checked,
                        StepOutcome* outcome) {
  UndoRecord record;
  record.new_node = state.attach_child(parent, label);
  std::vector<NodeId> path;
  if (checked) path = check_path(state, record.new_node, state.params().k);
  for (NodeId v : path) {
    const Label before = state.label(v);
    if (state.mark_pf(v)) record.relabeled.emplace_back(v, before);
  }
  if (outcome) {
    outcome->parent = parent;
    outcome->child_label = label;
    outcome->checked = checked;
    outcome->marked_path = std::move(path);
    outcome->new_node = record.new_node;
  }
  return record;
}

void undo(KnowledgeState& state, const UndoRecord& record) {
  for (auto it = record.relabeled.rbegin(); it != record.relabeled.rend(); ++it) {
    state.relabel(it->first, it->second);
  }
  state.remove_last_node();
}

StepOutcome step(KnowledgeState& state, RandomStream& rng) {
  const NodeId parent = state.sample_parent(rng);
  const bool error = rng.bernoulli(state.params().epsilon.value());
  const bool check = rng.bernoulli(state.params().p.value());
  StepOutcome out;
  apply_choice(state, parent, error ? Label::CF : Label::CT, check, &out);
  return out;
}

MetricsPlan MetricsPlan::geometric(std::uint64_t t_max) {
  MetricsPlan plan;
  plan.times_.push_back(0);
  for (std::uint64_t t = 1; t <= t_max; t *= 2) {
    plan.times_.push_back(t);
    if (t > t_max / 2) break;
  }
  if (plan.times_.back() != t_max) plan.times_.push_back(t_max);
  return plan;
}

MetricsPlan MetricsPlan::explicit_times(std::vector<std::uint64_t> times) {
  MetricsPlan plan;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  plan.times_ = std::move(times);
  return plan;
}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunResult run(KnowledgeState& state, RandomStream& rng, const RunOptions& options, const Observer& observe,
              const StepHook& on_step) {
  RunResult result;
  const auto& times = options.plan.times();
  auto next_time = std::lower_bound(times.begin(), times.end(), state.clock());
  auto emit_due = [&](std::uint64_t now) {
    while (next_time != times.end() && *next_time <= now) {
      if (observe) observe(*next_time, state);
      ++next_time;
    }
  };
  if (state.extinct()) {
    result.extinct = true;
    result.extinction_time = state.clock();
  }
  emit_due(state.clock());
  while (state.clock() < options.t_max && !state.extinct()) {
    const StepOutcome outcome = step(state, rng);
    ++result.steps;
    if (on_step) on_step(outcome, state);
    if (state.extinct()) {
      result.extinct = true;
      result.extinction_time = state.clock();
    }
    const bool due = next_time != times.end() && *next_time == state.clock();
    emit_due(state.clock());
    if (result.extinct && options.stop_on_extinction && !due && observe) {
      observe(state.clock(), state);
    }
  }
  if (!options.stop_on_extinction) {
    while (next_time != times.end() && *next_time <= options.t_max) {
      if (observe) observe(*next_time, state);
      ++next_time;
    }
  }
  result.final_digest_hash = fnv1a(state.digest());
  return result;
}

OutcomeDistribution one_step_support(const KnowledgeState& state) {
  if (state.extinct()) throw ExtinctError();
  const mpq_class& eps = state.params().epsilon.exact();
  const mpq_class& p = state.params().p.exact();
  const mpq_class total(state.total_weight());
  const std::pair<Label, mpq_class> labels[] = {{Label::CT, 1 - eps}, {Label::CF, eps}};
  const std::pair<bool, mpq_class> checks[] = {{false, 1 - p}, {true, p}};
  OutcomeDistribution dist;
  for (NodeId u = 0; u < state.size(); ++u) {
    const std::int64_t w = state.weight(u);
    if (w == 0) continue;
    const mpq_class pick = mpq_class(w) / total;
    for (const auto& [label, pl] : labels) {
      if (sgn(pl) == 0) continue;
      for (const auto& [checked, pc] : checks) {
        if (sgn(pc) == 0) continue;
        dist.outcomes.push_back({pick * pl * pc, predict_outcome(state, u, label, checked)});
      }
    }
  }
  return dist;
}

}  // namespace ckp
