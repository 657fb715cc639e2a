#include "ckp/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <unordered_set>

#include "ckp/decomposition.hpp"
#include "ckp/error.hpp"
#include "ckp/parallel.hpp"

namespace ckp {

// ---- observables ----

UnivalentStats univalent_stats(const KnowledgeState& state, NodeId subtree_root) {
  UnivalentStats out;
  std::vector<NodeId> order;
  std::vector<std::pair<NodeId, std::uint64_t>> stack{{subtree_root, 0}};
  while (!stack.empty()) {
    const auto [v, d] = stack.back();
    stack.pop_back();
    order.push_back(v);
    const NodeRecord& rec = state.node(v);
    if (is_pt(rec.label)) out.height = std::max(out.height, d);
    for (NodeId c : rec.children) stack.emplace_back(c, d + 1);
  }
  // Reverse preorder visits children before parents.
  std::vector<char> uni_below(state.size(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeRecord& rec = state.node(*it);
    const bool uni = is_pt(rec.label) && rec.deg_pt == 1;
    if (uni) {
      ++out.uni;
      if (!uni_below[rec.id]) ++out.iuni;
    }
    if (rec.parent && (uni || uni_below[rec.id])) uni_below[*rec.parent] = 1;
  }
  return out;
}

UnivalentStats univalent_stats(const KnowledgeState& state) { return univalent_stats(state, 0); }

MetricsRecord metrics(const KnowledgeState& state, bool with_potentials) {
  MetricsRecord m;
  m.t = state.clock();
  m.n_nodes = state.size();
  const auto truth = true_flags(state);
  std::vector<std::uint64_t> subtree_pt(state.size(), 0);
  for (const NodeRecord& rec : state.nodes()) {
    if (!is_pt(rec.label)) {
      ++m.n_pf;
      continue;
    }
    ++m.n_pt;
    if (truth[rec.id]) {
      ++m.n_true_pt;
    } else {
      ++m.n_false_pt;
    }
  }
  for (auto it = state.nodes().rbegin(); it != state.nodes().rend(); ++it) {
    subtree_pt[it->id] += is_pt(it->label) ? 1 : 0;
    if (it->parent) subtree_pt[*it->parent] += subtree_pt[it->id];
  }
  for (NodeId u : minimal_false_nodes(state)) m.m_t = std::max(m.m_t, subtree_pt[u]);
  const auto comps = pt_components(state);
  m.n_components = comps.size();
  for (const auto& c : comps) m.max_component = std::max<std::uint64_t>(m.max_component, c.size());
  const auto u = univalent_stats(state);
  m.uni = u.uni;
  m.iuni = u.iuni;
  m.height = u.height;
  if (with_potentials) m.potentials = read_potentials(state);
  m.potentials.t = m.t;
  m.extinct = state.extinct();
  return m;
}

// ---- drift certificates ----

std::string_view to_string(Relation relation) noexcept {
  switch (relation) {
    case Relation::Less: return "<";
    case Relation::Greater: return ">";
    case Relation::GreaterEq: return ">=";
  }
  return "?";
}

namespace {

bool holds(const mpq_class& value, const mpq_class& bound, Relation relation) {
  switch (relation) {
    case Relation::Less: return value < bound;
    case Relation::Greater: return value > bound;
    case Relation::GreaterEq: return value >= bound;
  }
  return false;
}

DriftCertificate certify(const KnowledgeState& state, PotentialKind kind, const mpq_class& bound, Relation relation,
                         std::optional<NodeId> block_root) {
  if (state.extinct()) throw ExtinctError();
  DriftCertificate cert;
  cert.potential = kind;
  cert.digest = state.digest();
  cert.potential_value = evaluate(state, kind);
  if ((kind == PotentialKind::Exp || kind == PotentialKind::LC) && sgn(cert.potential_value) == 0) {
    throw Error("potential is zero: the drift bound is vacuous");
  }
  cert.bound = bound;
  cert.relation = relation;

  LocalDelta local(state, kind);
  const auto support = one_step_support(state);
  mpq_class mass(0);
  bool first = true;
  const WeightedOutcome* previous = nullptr;
  mpq_class previous_delta;
  for (const auto& w : support.outcomes) {
    const StepOutcome& o = w.outcome;
    if (block_root && local.block_of(o.parent) != *block_root) continue;
    mpq_class delta;
    // A check that marks nothing yields the same tree as no check.
    if (o.checked && o.marked_path.empty() && previous && previous->outcome.parent == o.parent &&
        previous->outcome.child_label == o.child_label && !previous->outcome.checked) {
      delta = previous_delta;
    } else {
      delta = local.delta(o.parent, o.child_label, o.checked);
    }
    cert.expected_delta += w.probability * delta;
    mass += w.probability;
    ++cert.support_size;
    if (first || delta < cert.min_delta) cert.min_delta = delta;
    if (first || delta > cert.max_delta) cert.max_delta = delta;
    first = false;
    previous = &w;
    previous_delta = delta;
  }
  if (cert.support_size == 0) throw Error("conditioning block receives no insertions");
  if (block_root) cert.expected_delta /= mass;
  cert.expected_delta.canonicalize();
  cert.max_abs_delta = std::max(abs(cert.min_delta), abs(cert.max_delta));
  cert.satisfied = holds(cert.expected_delta, bound, relation);
  return cert;
}

}  // namespace

DriftCertificate drift_certificate(const KnowledgeState& state, PotentialKind kind, const mpq_class& bound,
                                   Relation relation) {
  return certify(state, kind, bound, relation, std::nullopt);
}

DriftCertificate conditional_drift_certificate(const KnowledgeState& state, PotentialKind kind, NodeId block_root,
                                               const mpq_class& bound, Relation relation) {
  return certify(state, kind, bound, relation, block_root);
}

std::vector<KnowledgeState> harvest_states(const ModelParams& params, const InitKind& init, std::size_t count,
                                           std::uint64_t t_max, std::uint64_t seed,
                                           const std::function<bool(const KnowledgeState&)>& keep,
                                           std::uint64_t max_trajectories) {
  std::vector<KnowledgeState> out;
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; i < max_trajectories && out.size() < count; ++i) {
    KnowledgeState state(params, init);
    RandomStream rng = RandomStream::split(seed, i);
    run(state, rng, RunOptions{t_max, true, MetricsPlan::geometric(t_max)},
        [&](std::uint64_t, const KnowledgeState& s) {
          if (out.size() >= count || s.extinct()) return;
          if (keep && !keep(s)) return;
          if (seen.insert(s.digest()).second) out.push_back(s);
        });
  }
  return out;
}

namespace {

struct ShapeBuilder {
  std::vector<std::pair<int, Label>> nodes{{-1, Label::CF}};

  int add(int parent) {
    nodes.emplace_back(parent, Label::CT);
    return static_cast<int>(nodes.size()) - 1;
  }
  int path(int from, int length) {
    for (int i = 0; i < length; ++i) from = add(from);
    return from;
  }
  void star(int centre, int leaves) {
    for (int i = 0; i < leaves; ++i) add(centre);
  }
  void binary(int node, int depth) {
    if (depth == 0) return;
    binary(add(node), depth - 1);
    binary(add(node), depth - 1);
  }

  KnowledgeState build(const ModelParams& params, bool interior_cf) const {
    ExplicitTree t;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      NodeSpec spec;
      if (nodes[i].first >= 0) spec.parent = static_cast<NodeId>(nodes[i].first);
      spec.label = nodes[i].second;
      if (interior_cf && i > 0 && spec.label == Label::CT && i % 3 == 2) spec.label = Label::CF;
      t.nodes.push_back(spec);
    }
    return KnowledgeState(params, t);
  }
};

}  // namespace

std::vector<NamedState> extremal_states(const ModelParams& params, bool interior_cf) {
  std::vector<NamedState> out;
  auto emit = [&](std::string name, const ShapeBuilder& b) {
    out.push_back({std::move(name), b.build(params, interior_cf)});
  };
  const int k = params.k.is_bounded() ? static_cast<int>(std::min<std::uint32_t>(params.k.value(), 60)) : 8;

  emit("singleton", ShapeBuilder{});
  for (int len : std::set<int>{1, 2, 3, k - 1, k, k + 1, 2 * k, 3 * k + 5}) {
    if (len < 1) continue;
    ShapeBuilder b;
    b.path(0, len);
    emit("path-" + std::to_string(len), b);
  }
  for (int leaves : std::set<int>{2, 5, 20, 2 * k + 10}) {
    ShapeBuilder b;
    b.star(0, leaves);
    emit("star-" + std::to_string(leaves), b);
  }
  for (int handle : std::set<int>{k - 1, k, 2 * k}) {
    if (handle < 1) continue;
    ShapeBuilder b;
    b.star(b.path(0, handle), 12);
    emit("broom-" + std::to_string(handle), b);
  }
  {
    ShapeBuilder b;
    int spine = 0;
    for (int i = 0; i < 2 * k + 2; ++i) {
      spine = b.add(spine);
      b.add(spine);
    }
    emit("caterpillar", b);
  }
  for (int depth : {3, 5}) {
    ShapeBuilder b;
    b.binary(0, depth);
    emit("binary-" + std::to_string(depth), b);
  }
  {
    ShapeBuilder b;
    for (int leg = 0; leg < 5; ++leg) b.path(0, k);
    emit("spider", b);
  }
  {
    ShapeBuilder b;
    for (int i = 0; i < 6; ++i) b.star(b.add(0), 6);
    emit("star-of-stars", b);
  }
  {
    ShapeBuilder b;
    b.star(0, 30);
    b.path(0, 3 * k);
    emit("star-with-tail", b);
  }
  {
    // Root marked PF: three fresh components hanging below it.
    ShapeBuilder b;
    b.nodes[0].second = Label::PF;
    b.path(0, k);
    b.star(b.add(0), 8);
    b.binary(b.add(0), 3);
    emit("fractured-root", b);
  }
  {
    // Fracture in the middle of a path: PF chain with a live subtree below.
    ShapeBuilder b;
    b.nodes[0].second = Label::PF;
    const int mid = b.add(0);
    b.nodes[mid].second = Label::PF;
    const int live = b.add(mid);
    b.path(live, k + 2);
    b.star(live, 4);
    emit("fractured-path", b);
  }
  {
    ShapeBuilder b;
    b.nodes[0].second = Label::PF;
    for (int i = 0; i < 10; ++i) b.add(0);
    emit("fractured-singletons", b);
  }
  return out;
}

// ---- trial simulation ----

std::string_view to_string(Tracking tracking) noexcept {
  return tracking == Tracking::Whole ? "whole" : "first-cf";
}

Tracking parse_tracking(std::string_view text) {
  if (text == "whole") return Tracking::Whole;
  if (text == "first-cf") return Tracking::FirstCF;
  throw ConfigError("unknown tracking '" + std::string(text) + "' (whole | first-cf)");
}

TrialSummary simulate_trial(const TrialOptions& options, std::uint64_t seed, std::uint64_t trial) {
  TrialSummary out;
  out.trial = trial;
  out.tracking = options.tracking;
  KnowledgeState state(options.params, options.init);
  RandomStream rng = RandomStream::split(seed, trial);
  const std::uint64_t half = options.t_max / 2;

  std::vector<char> tracked;     // node lies in the tracked subtree
  std::vector<char> tracked_pt;  // ... and is still PT
  std::uint64_t tracked_live = 0;
  auto alive = [&] {
    return options.tracking == Tracking::Whole ? !state.extinct() : (out.tracked_root && tracked_live > 0);
  };
  if (half == 0) out.alive_half = alive();

  std::optional<ComponentTracker> components;
  if (options.track_running_max) components.emplace(state);
  auto on_step = [&](const StepOutcome& o, const KnowledgeState& s) {
    if (components) components->observe(s, o);
    if (options.tracking == Tracking::FirstCF) {
      tracked.resize(s.size(), 0);
      tracked_pt.resize(s.size(), 0);
      if (!out.tracked_root && o.child_label == Label::CF) out.tracked_root = o.new_node;
      if ((out.tracked_root && *out.tracked_root == o.new_node) || tracked[o.parent]) {
        tracked[o.new_node] = 1;
        tracked_pt[o.new_node] = 1;
        ++tracked_live;
      }
      for (NodeId v : o.marked_path) {
        if (tracked_pt[v]) {
          tracked_pt[v] = 0;
          --tracked_live;
        }
      }
      if (out.tracked_root && tracked_live == 0 && !out.death_time) out.death_time = s.clock();
    }
    if (s.clock() == half) out.alive_half = alive();
    if (options.on_step) options.on_step(trial, o, s);
  };
  Observer observe;
  if (options.series_plan) {
    observe = [&](std::uint64_t t, const KnowledgeState& s) {
      out.series.push_back(metrics(s, options.with_potentials));
      out.series.back().t = t;
      out.series.back().potentials.t = t;
      if (components) out.running_max.push_back(components->running_max());
    };
  }
  const RunResult result = run(state, rng,
                               RunOptions{options.t_max, options.stop_on_extinction,
                                          options.series_plan ? *options.series_plan : MetricsPlan::explicit_times({})},
                               observe, on_step);
  out.steps = result.steps;
  out.extinct = result.extinct;
  out.extinction_time = result.extinction_time;
  if (options.tracking == Tracking::Whole) out.death_time = result.extinction_time;
  // The run stopped early only through extinction, so the tracked region is
  // dead at every later time as well.
  if (state.clock() < half) out.alive_half = alive();
  out.alive_final = alive();
  out.final_metrics = metrics(state, options.with_potentials);
  out.digest_hash = result.final_digest_hash;
  return out;
}

std::vector<TrialSummary> run_trials(const TrialOptions& options, std::uint64_t trials, std::uint64_t seed,
                                     unsigned threads) {
  std::vector<TrialSummary> out(trials);
  parallel_for(trials, threads, [&](std::uint64_t i) { out[i] = simulate_trial(options, seed, i); });
  return out;
}

double SurvivalEstimate::deaths_before(std::uint64_t t) const {
  if (deaths.empty()) return 1.0;
  const auto it = std::lower_bound(deaths.begin(), deaths.end(), t);
  return static_cast<double>(it - deaths.begin()) / static_cast<double>(deaths.size());
}

SurvivalEstimate summarize_survival(const std::vector<TrialSummary>& summaries, std::uint64_t t_max) {
  SurvivalEstimate e;
  e.trials = summaries.size();
  e.t_max = t_max;
  if (e.trials == 0) throw Error("survival estimate needs at least one trial");
  for (const auto& s : summaries) {
    e.survivors += s.alive_final;
    e.survivors_half += s.alive_half;
    if (s.tracking == Tracking::FirstCF && !s.tracked_root) ++e.untracked;
    if (!s.alive_final && s.death_time) e.deaths.push_back(*s.death_time);
  }
  std::sort(e.deaths.begin(), e.deaths.end());
  for (std::uint64_t d : e.deaths) {
    const std::uint64_t bin = d == 0 ? 0 : std::uint64_t{1} << (63 - std::countl_zero(d));
    ++e.death_histogram[bin];
  }
  const double n = static_cast<double>(e.trials);
  e.frequency = static_cast<double>(e.survivors) / n;
  e.frequency_half = static_cast<double>(e.survivors_half) / n;
  e.se = std::sqrt(e.frequency * (1 - e.frequency) / n);
  e.se_half = std::sqrt(e.frequency_half * (1 - e.frequency_half) / n);
  e.ci = wilson_interval(e.survivors, e.trials);
  e.ci_half = wilson_interval(e.survivors_half, e.trials);
  return e;
}

SurvivalEstimate survival_estimate(const ModelParams& params, const InitKind& init, std::uint64_t trials,
                                   std::uint64_t t_max, std::uint64_t seed, unsigned threads, Tracking tracking) {
  TrialOptions options;
  options.params = params;
  options.init = init;
  options.t_max = t_max;
  options.tracking = tracking;
  options.with_potentials = false;
  // General-model trials never go extinct; keep running so the tracked
  // subtree is observed up to t_max.
  return summarize_survival(run_trials(options, trials, seed, threads), t_max);
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Eliminating: return "eliminating";
    case Regime::Surviving: return "surviving";
    case Regime::Inconclusive: return "inconclusive";
  }
  return "?";
}

Regime classify_regime(const SurvivalEstimate& e) {
  if (e.trials < 100) throw Error("classify_regime needs at least 100 trials per cell");
  if (e.ci.low > 0 && e.frequency >= e.frequency_half - 2 * e.se) return Regime::Surviving;
  if (e.ci.high < 0.01 && e.deaths_before(e.t_max / 2) >= 0.99) return Regime::Eliminating;
  return Regime::Inconclusive;
}

MeanSE reliability_ratio(const std::vector<TrialSummary>& summaries) {
  if (summaries.empty()) throw Error("reliability_ratio needs at least one trial");
  std::vector<double> ratios;
  for (const auto& s : summaries) {
    if (s.final_metrics.n_pt == 0) continue;
    ratios.push_back(static_cast<double>(s.final_metrics.n_false_pt) / static_cast<double>(s.final_metrics.n_pt));
  }
  return mean_se(ratios);
}

// ---- tau statistics ----

double TauStatistics::tail(std::uint64_t t) const {
  const auto above = static_cast<std::uint64_t>(tau.end() - std::upper_bound(tau.begin(), tau.end(), t));
  return static_cast<double>(above + censored) / static_cast<double>(trials);
}

double TauStatistics::mass(std::uint64_t t) const {
  const auto range = std::equal_range(tau.begin(), tau.end(), t);
  return static_cast<double>(range.second - range.first) / static_cast<double>(trials);
}

LinearFit TauStatistics::tail_slope(std::uint64_t lo, std::uint64_t hi, int points) const {
  if (hi >= cap) throw Error("tau tail requested beyond the censoring cap");
  std::vector<double> x, y;
  std::uint64_t last = 0;
  for (int i = 0; i < points; ++i) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const auto t = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(lo) * std::pow(static_cast<double>(hi) / static_cast<double>(lo), frac)));
    if (t == last) continue;
    last = t;
    const double q = tail(t);
    if (q <= 0) throw Error("empirical tau tail is zero at t = " + std::to_string(t));
    x.push_back(std::log(static_cast<double>(t)));
    y.push_back(std::log(q));
  }
  return ols(x, y);
}

TauStatistics tau_statistics(const Probability& p, std::uint32_t chain_length, std::uint64_t trials,
                             std::uint64_t cap, std::uint64_t seed, unsigned threads) {
  const ModelParams params = ModelParams::simple(p, CheckDepth::bounded(2));
  std::vector<std::optional<std::uint64_t>> times(trials);
  parallel_for(trials, threads, [&](std::uint64_t i) {
    KnowledgeState state(params, UnivalentInit{chain_length});
    RandomStream rng = RandomStream::split(seed, i);
    constexpr NodeId kTracked = 1;
    while (state.clock() < cap && !state.extinct()) {
      step(state, rng);
      if (state.label(kTracked) == Label::PF || state.node(kTracked).deg_pt >= 2) {
        times[i] = state.clock();
        return;
      }
    }
  });
  TauStatistics out;
  out.trials = trials;
  out.cap = cap;
  for (const auto& t : times) {
    if (t) {
      out.tau.push_back(*t);
    } else {
      ++out.censored;
    }
  }
  std::sort(out.tau.begin(), out.tau.end());
  return out;
}

// ---- Polya urn ----

UrnMoments polya_urn_moments(std::uint64_t t0, std::uint64_t t) {
  if (t0 < 2) throw Error("polya urn needs t0 >= 2");
  const mpz_class T(static_cast<unsigned long>(t)), T0(static_cast<unsigned long>(t0));
  UrnMoments m;
  m.mean = mpq_class(T, T0);
  m.second_moment = mpq_class(T * (2 * T + T0 - 1), T0 * (T0 + 1));
  m.mean.canonicalize();
  m.second_moment.canonicalize();
  return m;
}

mpq_class polya_urn_tail(std::uint64_t t0, std::uint64_t t, std::uint64_t x) {
  if (t0 < 2) throw Error("polya urn needs t0 >= 2");
  // P(X = j) = t!/(t-j)! * beta * (t-j+beta-1)! / (t+beta)!,  beta = t0 - 1.
  const unsigned long beta = t0 - 1;
  mpz_class denom;
  mpz_fac_ui(denom.get_mpz_t(), t + beta);
  mpq_class total(0);
  for (std::uint64_t j = x; j <= t; ++j) {
    mpz_class falling = 1;
    for (std::uint64_t i = t - j + 1; i <= t; ++i) falling *= static_cast<unsigned long>(i);
    mpz_class rest;
    mpz_fac_ui(rest.get_mpz_t(), t - j + beta - 1);
    total += mpq_class(falling * beta * rest, denom);
  }
  total.canonicalize();
  return total;
}

std::uint64_t polya_urn_sample(std::uint64_t t0, std::uint64_t t, RandomStream& rng) {
  if (t0 < 2) throw Error("polya urn needs t0 >= 2");
  std::uint64_t white = 1, black = t0 - 1, drawn = 0;
  for (std::uint64_t i = 0; i < t; ++i) {
    if (rng.below(white + black) < white) {
      ++white;
      ++drawn;
    } else {
      ++black;
    }
  }
  return drawn;
}

}  // namespace ckp
