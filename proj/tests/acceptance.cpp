// Acceptance runner: one PASS/FAIL line per criterion.
//
//   ckp_acceptance [--only N ...] [--threads T] [--seed S]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ckp/analysis.hpp"
#include "ckp/decomposition.hpp"
#include "ckp/harness.hpp"
#include "ckp/oracle.hpp"
#include "ckp/parallel.hpp"

using namespace ckp;

namespace {

struct Context {
  unsigned threads = 1;
  std::uint64_t seed = 1;

  std::uint64_t seed_for(int criterion) const {
    return RandomStream::split(seed, static_cast<std::uint64_t>(criterion)).next_u64();
  }
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string exact(const mpq_class& q) {
  if (q.get_den() == 1) return q.get_str();
  return q.get_str() + " (" + num(q.get_d()) + ")";
}

Probability prob(const char* text) { return Probability::parse(text); }

// ---- certificate sets ----

struct Tally {
  std::size_t states = 0;
  std::size_t harvested = 0;
  std::size_t satisfied = 0;
  std::size_t abs_le_2 = 0;
  mpq_class lowest, highest, min_delta, max_delta;

  void add(const DriftCertificate& c) {
    if (states == 0) {
      lowest = highest = c.expected_delta;
      min_delta = c.min_delta;
      max_delta = c.max_delta;
    }
    ++states;
    satisfied += c.satisfied;
    abs_le_2 += c.max_abs_delta <= 2;
    lowest = std::min(lowest, c.expected_delta);
    highest = std::max(highest, c.expected_delta);
    min_delta = std::min(min_delta, c.min_delta);
    max_delta = std::max(max_delta, c.max_delta);
  }
  bool all() const { return states > 0 && satisfied == states; }
};

std::vector<KnowledgeState> positive_states(const ModelParams& params, const InitKind& init, PotentialKind kind,
                                            std::size_t count, std::uint64_t t_max, std::uint64_t seed,
                                            std::uint64_t max_trajectories = 1'000'000) {
  return harvest_states(
      params, init, count, t_max, seed, [kind](const KnowledgeState& s) { return sgn(evaluate(s, kind)) > 0; },
      max_trajectories);
}

std::vector<KnowledgeState> extremal_positive(const ModelParams& params, bool interior_cf, PotentialKind kind) {
  std::vector<KnowledgeState> out;
  for (auto& n : extremal_states(params, interior_cf)) {
    if (kind == PotentialKind::Exp || kind == PotentialKind::LC) {
      if (sgn(evaluate(n.state, kind)) == 0) continue;
    }
    out.push_back(std::move(n.state));
  }
  return out;
}

Tally certify_all(const std::vector<KnowledgeState>& harvested, const std::vector<KnowledgeState>& extra,
                  PotentialKind kind, const mpq_class& bound, Relation relation, unsigned threads) {
  std::vector<const KnowledgeState*> all;
  for (const auto& s : harvested) all.push_back(&s);
  for (const auto& s : extra) all.push_back(&s);
  std::vector<DriftCertificate> certs(all.size());
  parallel_for(all.size(), threads, [&](std::uint64_t i) { certs[i] = drift_certificate(*all[i], kind, bound, relation); });
  Tally t;
  for (const auto& c : certs) t.add(c);
  t.harvested = harvested.size();
  return t;
}

std::string describe(const Tally& t, const std::string& what) {
  std::ostringstream s;
  s << t.states << " states (" << t.harvested << " harvested, " << t.states - t.harvested << " extremal), " << what
    << " on " << t.satisfied << "/" << t.states << ", E range [" << exact(t.lowest) << ", " << exact(t.highest) << "]";
  return s.str();
}

// ---- criteria ----

Verdict exp_contraction_simple(const Context& ctx) {
  const auto params = ModelParams::simple(prob("6/7"), CheckDepth::bounded(4));
  const auto harvested = positive_states(params, SimpleRootCF{}, PotentialKind::Exp, 1000, 4096, ctx.seed_for(1),
                                         20'000'000);
  const auto extra = extremal_positive(params, false, PotentialKind::Exp);
  const auto t = certify_all(harvested, extra, PotentialKind::Exp, 0, Relation::Less, ctx.threads);
  return {t.all() && harvested.size() >= 1000 && extra.size() >= 20,
          "p=6/7 k=4: " + describe(t, "E[dPhi_exp] < 0")};
}

Verdict lc_drift_simple(const Context& ctx) {
  bool drift_ok = true;
  bool step_ok = true;
  std::ostringstream s;
  for (const char* p : {"1/10", "1/5", "1/4"}) {
    const auto params = ModelParams::simple(prob(p), CheckDepth::bounded(5));
    const mpq_class bound = mpq_class(1, 2) - 2 * params.p.exact();
    const mpq_class weaker = mpq_class(1, 2) - mpq_class(5, 2) * params.p.exact();
    const auto harvested = positive_states(params, SimpleRootCF{}, PotentialKind::LC, 1000, 256, ctx.seed_for(2));
    const auto extra = extremal_positive(params, false, PotentialKind::LC);
    const auto t = certify_all(harvested, extra, PotentialKind::LC, bound, Relation::Greater, ctx.threads);
    drift_ok = drift_ok && t.all() && harvested.size() >= 1000;
    step_ok = step_ok && t.abs_le_2 == t.states;
    s << "\n    p=" << p << " k=5: " << describe(t, "E[dPhi_lc] > " + bound.get_str())
      << "; |dPhi_lc| <= 2 on " << t.abs_le_2 << "/" << t.states << " states, one-step range [" << exact(t.min_delta)
      << ", " << exact(t.max_delta) << "]; weaker constant " << weaker.get_str() << " also holds ("
      << (t.lowest > weaker ? "yes" : "no") << ")";
  }
  std::string head = std::string("expectation bound ") + (drift_ok ? "holds" : "FAILS") +
                     ", step bound |dPhi_lc| <= 2 " + (step_ok ? "holds" : "FAILS");
  return {drift_ok && step_ok, head + s.str()};
}

Verdict combined_submartingale(const Context& ctx) {
  const auto params = ModelParams::simple(prob("0.16"), CheckDepth::bounded(40));
  const bool admissible = combined_admissible(params.p, params.k);
  const auto harvested = harvest_states(params, SimpleRootCF{}, 300, 512, ctx.seed_for(3));
  const auto extra = extremal_positive(params, false, PotentialKind::Combined);
  const auto t = certify_all(harvested, extra, PotentialKind::Combined, 0, Relation::Greater, ctx.threads);
  return {admissible && t.all() && harvested.size() >= 300,
          std::string("p=0.16 k=40 (12/79 <= p <= 1/6: ") + (admissible ? "yes" : "no") + "): " +
              describe(t, "E[dPhi_combined] > 0")};
}

Verdict general_certificates(const Context& ctx) {
  const ModelParams params{prob("0.05"), prob("0.95"), CheckDepth::bounded(10)};
  const mpq_class margin = elimination_margin(params);
  const std::uint64_t seed = ctx.seed_for(4);
  std::ostringstream s;
  s << "eps=0.05 p=0.95 k=10, elimination margin " << exact(margin);

  // All-False trees: unconditional contraction.
  const auto cf_root = positive_states(params, SimpleRootCF{}, PotentialKind::Exp, 500, 4096, seed);
  const auto cf_extra = extremal_positive(params, true, PotentialKind::Exp);
  const auto whole = certify_all(cf_root, cf_extra, PotentialKind::Exp, 0, Relation::Less, ctx.threads);
  s << "\n    Phi_exp, CF root: " << describe(whole, "E[dPhi_exp] < 0");

  // Trees with a True part: contraction given the insertion lands in a block.
  const auto ct_root = positive_states(params, GeneralRootCT{}, PotentialKind::Exp, 500, 4096, seed);
  std::vector<std::vector<DriftCertificate>> per_state(ct_root.size());
  parallel_for(ct_root.size(), ctx.threads, [&](std::uint64_t i) {
    for (const auto& b : blocks(ct_root[i])) {
      per_state[i].push_back(conditional_drift_certificate(ct_root[i], PotentialKind::Exp, b.root, 0, Relation::Less));
    }
  });
  Tally cond;
  std::size_t states_ok = 0;
  for (const auto& certs : per_state) {
    bool ok = true;
    for (const auto& c : certs) {
      cond.add(c);
      ok = ok && c.satisfied;
    }
    states_ok += ok;
  }
  s << "\n    Phi_exp, CT root, per block given the parent is in it: " << ct_root.size() << " states, "
    << cond.states << " blocks, E[dPhi_exp | block] < 0 on " << cond.satisfied << "/" << cond.states
    << ", E range [" << exact(cond.lowest) << ", " << exact(cond.highest) << "]";
  const auto unconditional = certify_all(ct_root, {}, PotentialKind::Exp, 0, Relation::Less, ctx.threads);
  s << "\n    (for reference, whole-tree E[dPhi_exp] < 0 on " << unconditional.satisfied << "/" << unconditional.states
    << " CT-root states, max " << exact(unconditional.highest) << ")";

  const auto rel_states = harvest_states(params, GeneralRootCT{}, 500, 4096, seed);
  const auto rel_extra = extremal_positive(params, true, PotentialKind::Reliability);
  const auto rel = certify_all(rel_states, rel_extra, PotentialKind::Reliability, 0, Relation::GreaterEq, ctx.threads);
  s << "\n    Phi_reliability, CT root: " << describe(rel, "E[dPhi_rel] >= 0");

  const bool exp_ok = whole.all() && cond.all() && states_ok == ct_root.size() &&
                      whole.states + ct_root.size() >= 500;
  const bool pass = sgn(margin) < 0 && exp_ok && rel.all() && rel_states.size() >= 500;
  return {pass, s.str()};
}

Verdict oracle_equivalence(const Context& ctx) {
  struct Case {
    const char* eps;
    const char* p;
    std::uint32_t k;
  };
  bool pass = true;
  std::ostringstream s;
  s << "horizon 6, 100000 samples, threshold TV <= 0.01";
  std::uint64_t index = 0;
  for (const Case& c : {Case{"0", "1/2", 2}, Case{"0", "1/4", 3}, Case{"1/3", "1/2", 2}}) {
    const ModelParams params{prob(c.eps), prob(c.p), CheckDepth::bounded(c.k)};
    const InitKind init = params.epsilon.is_zero() ? InitKind(SimpleRootCF{}) : InitKind(GeneralRootCT{});
    const auto exact_dist = enumerate(params, init, 6);
    const auto sample =
        sample_digests(params, init, 6, 100000, RandomStream::split(ctx.seed_for(5), index++).next_u64(), ctx.threads);
    s << "\n    (" << c.eps << ", " << c.p << ", " << c.k << "): support " << exact_dist.atoms.size();
    try {
      const auto cmp = compare(sample, exact_dist);
      const bool ok = cmp.total_variation <= 0.01;
      pass = pass && ok;
      s << ", all digests in support, observed " << cmp.observed_support << ", TV " << num(cmp.total_variation)
        << (ok ? "" : " > 0.01") << ", exact-sampler E[TV] " << num(cmp.expected_total_variation)
        << ", chi-square p " << num(cmp.p_value);
    } catch (const SupportViolation& e) {
      pass = false;
      s << ", digest outside support: " << e.digest();
    }
  }
  return {pass, s.str()};
}

Verdict elimination(const Context& ctx) {
  const auto params = ModelParams::simple(prob("0.9"), CheckDepth::bounded(4));
  const auto e = survival_estimate(params, SimpleRootCF{}, 500, 100000, ctx.seed_for(6), ctx.threads);
  const double early = e.deaths_before(10000);
  std::ostringstream s;
  s << "p=0.9 k=4, 500 trials to 1e5: survivors " << e.survivors << ", Wilson95 [" << num(e.ci.low) << ", "
    << num(e.ci.high) << "], deaths before 1e4 " << num(early) << ", latest death "
    << (e.deaths.empty() ? 0 : e.deaths.back());
  return {e.survivors == 0 && early >= 0.99, s.str()};
}

Verdict survival_simple(const Context& ctx) {
  const auto params = ModelParams::simple(prob("0.2"), CheckDepth::bounded(5));
  const auto e = survival_estimate(params, SimpleRootCF{}, 500, 10000, ctx.seed_for(7), ctx.threads);
  const double se = std::max(e.se, e.se_half);
  const double gap = std::abs(e.frequency - e.frequency_half);
  std::ostringstream s;
  s << "p=0.2 k=5, 500 trials to 1e4: f=" << num(e.frequency) << " Wilson95 [" << num(e.ci.low) << ", "
    << num(e.ci.high) << "], f(5000)=" << num(e.frequency_half) << ", gap " << num(gap) << " vs 2 SE " << num(2 * se);
  return {e.ci.low > 0 && gap <= 2 * se, s.str()};
}

Verdict shallow_survival(const Context& ctx) {
  const auto params = ModelParams::simple(prob("0.5"), CheckDepth::bounded(2));
  auto e = survival_estimate(params, SimpleRootCF{}, 5000, 10000, ctx.seed_for(8), ctx.threads);
  std::ostringstream s;
  s << "p=0.5 k=2, 5000 trials to 1e4: survivors " << e.survivors << ", f=" << num(e.frequency) << " Wilson95 ["
    << num(e.ci.low) << ", " << num(e.ci.high) << "]";
  if (e.survivors == 0) {
    e = survival_estimate(params, SimpleRootCF{}, 20000, 10000, ctx.seed_for(8) + 1, ctx.threads);
    s << "; escalated to 20000 trials: survivors " << e.survivors << ", f=" << num(e.frequency) << " Wilson95 ["
      << num(e.ci.low) << ", " << num(e.ci.high) << "]";
  }
  return {e.survivors > 0, s.str()};
}

Verdict survival_general(const Context& ctx) {
  const ModelParams params{prob("0.3"), prob("0.1"), CheckDepth::bounded(3)};
  const auto e = survival_estimate(params, GeneralRootCT{}, 500, 10000, ctx.seed_for(9), ctx.threads,
                                   Tracking::FirstCF);
  std::ostringstream s;
  s << "eps=0.3 p=0.1 k=3 (margin " << exact(survival_margin(params)) << "), first CF subtree, 500 trials to 1e4: f="
    << num(e.frequency) << " Wilson95 [" << num(e.ci.low) << ", " << num(e.ci.high) << "], untracked "
    << e.untracked;
  return {sgn(survival_margin(params)) > 0 && e.ci.low > 0, s.str()};
}

Verdict high_reliability(const Context& ctx) {
  TrialOptions opt;
  opt.params = ModelParams{prob("0.05"), prob("0.95"), CheckDepth::bounded(10)};
  opt.init = GeneralRootCT{};
  opt.t_max = 10000;
  opt.with_potentials = false;
  const auto trials = run_trials(opt, 200, ctx.seed_for(10), ctx.threads);
  const double eps = opt.params.epsilon.value();
  const double q = 1 - opt.params.p.value();
  std::vector<double> balance;
  for (const auto& t : trials) {
    balance.push_back((1 - eps) * static_cast<double>(t.final_metrics.n_false_pt) -
                      eps * q * static_cast<double>(t.final_metrics.n_true_pt));
  }
  const auto m = mean_se(balance);
  const auto ratio = reliability_ratio(trials);
  std::ostringstream s;
  s << "eps=0.05 p=0.95 k=10, 200 trials at 1e4: mean (1-eps)|F_pt| - eps(1-p)|T_pt| = " << num(m.mean) << " (SE "
    << num(m.se) << "), False share of PT nodes " << num(ratio.mean) << " vs eps(1-p) " << num(eps * q);
  return {m.mean <= 2 * m.se, s.str()};
}

Verdict component_scaling(const Context& ctx) {
  std::ostringstream s;
  bool pass = true;

  {
    std::vector<std::uint64_t> times;
    for (int e = 10; e <= 17; ++e) times.push_back(std::uint64_t{1} << e);
    TrialOptions opt;
    opt.params = ModelParams::simple(prob("0.16"), CheckDepth::bounded(40));
    opt.t_max = times.back();
    opt.with_potentials = false;
    opt.series_plan = MetricsPlan::explicit_times(times);
    const auto trials = run_trials(opt, 200, ctx.seed_for(11), ctx.threads);
    std::vector<double> x, y;
    s << "\n    p=0.16 k=40, 200 trials, max over trials of maxComponent:";
    for (std::uint64_t t : times) {
      std::uint64_t best = 0;
      for (const auto& tr : trials) {
        for (const auto& m : tr.series) {
          if (m.t == t) best = std::max(best, m.max_component);
        }
      }
      s << ' ' << best;
      if (best > 0) {
        x.push_back(std::log(static_cast<double>(t)));
        y.push_back(std::log(static_cast<double>(best)));
      }
    }
    const bool enough = x.size() >= 3;
    const LinearFit fit = enough ? ols(x, y) : LinearFit{};
    const double upper = enough ? fit.slope_upper(0.95) : 1.0;
    const bool ok = enough && upper < 1;
    pass = pass && ok;
    s << "; log-log slope " << num(fit.slope) << ", 95% upper bound " << num(upper) << (ok ? " < 1" : " not < 1");
  }

  {
    const std::vector<std::uint64_t> times{1u << 12, 1u << 13, 1u << 14, 1u << 15, 1u << 16, 1u << 17};
    TrialOptions opt;
    opt.params = ModelParams::simple(prob("0.2"), CheckDepth::bounded(5));
    opt.t_max = times.back();
    opt.with_potentials = false;
    opt.track_running_max = true;
    opt.series_plan = MetricsPlan::explicit_times(times);
    const auto trials = run_trials(opt, 500, RandomStream::split(ctx.seed_for(11), 1).next_u64(), ctx.threads);
    std::vector<std::vector<double>> columns(times.size());
    bool monotone = true;
    for (const auto& tr : trials) {
      if (!tr.alive_final || tr.running_max.size() != times.size()) continue;
      for (std::size_t i = 0; i < times.size(); ++i) {
        columns[i].push_back(static_cast<double>(tr.running_max[i]));
        if (i > 0 && tr.running_max[i] < tr.running_max[i - 1]) monotone = false;
      }
    }
    std::vector<double> medians;
    for (auto& c : columns) {
      std::sort(c.begin(), c.end());
      medians.push_back(c.empty() ? 0.0 : (c[(c.size() - 1) / 2] + c[c.size() / 2]) / 2);
    }
    const double ratio = medians.front() > 0 ? medians.back() / medians.front() : 0.0;
    const bool ok = !columns.front().empty() && monotone && ratio >= 2;
    pass = pass && ok;
    s << "\n    p=0.2 k=5, 500 trials, " << columns.front().size()
      << " survivors to 2^17, median running max at 2^12..2^17:";
    for (double m : medians) s << ' ' << num(m);
    s << "; non-decreasing " << (monotone ? "yes" : "no") << ", growth x" << num(ratio)
      << (ratio >= 2 ? " >= 2" : " < 2");
  }
  return {pass, (pass ? "sublinear and growing" : "see parts") + s.str()};
}

Verdict urn(const Context& ctx) {
  constexpr std::uint64_t t0 = 10, t = 90, runs = 100000;
  const auto moments = polya_urn_moments(t0, t);
  std::vector<double> x(runs), x2(runs), hit(runs);
  for (std::uint64_t i = 0; i < runs; ++i) {
    RandomStream rng = RandomStream::split(ctx.seed_for(12), i);
    const double v = static_cast<double>(polya_urn_sample(t0, t, rng));
    x[i] = v;
    x2[i] = v * v;
    hit[i] = v >= t0 / 2.0 ? 1.0 : 0.0;
  }
  const auto m1 = mean_se(x);
  const auto m2 = mean_se(x2);
  const auto h = mean_se(hit);
  const double z1 = (m1.mean - moments.mean.get_d()) / m1.se;
  const double z2 = (m2.mean - moments.second_moment.get_d()) / m2.se;
  const bool tail_ok = h.mean >= 0.125 - 3 * h.se;
  std::ostringstream s;
  s << "t0=10 t=90, 100000 runs: mean " << num(m1.mean) << " vs " << exact(moments.mean) << " (z " << num(z1)
    << "), second moment " << num(m2.mean) << " vs " << exact(moments.second_moment) << " (z " << num(z2)
    << "), P(X >= 5) " << num(h.mean) << " (exact " << num(polya_urn_tail(t0, t, 5).get_d()) << ", floor 1/8 - 3 SE = "
    << num(0.125 - 3 * h.se) << ")";
  return {std::abs(z1) <= 4 && std::abs(z2) <= 4 && tail_ok, s.str()};
}

Verdict tau_tail(const Context& ctx) {
  const auto stats = tau_statistics(prob("1/2"), 3, 100000, 2000, ctx.seed_for(13), ctx.threads);
  const auto fit = stats.tail_slope(10, 1000);
  std::ostringstream s;
  s << "k=2 univalent chain of 3, tau at node 1, the PF root's single child (named r' or r), p=1/2, "
       "100000 trials: P(tau > 10) " << num(stats.tail(10)) << ", P(tau > 1000) "
    << num(stats.tail(1000)) << ", slope over [10, 1000] " << num(fit.slope) << " (SE " << num(fit.slope_se)
    << "), censored " << stats.censored;
  return {std::abs(fit.slope + 1) <= 0.15, s.str()};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Verdict determinism(const Context& ctx) {
  const auto root = std::filesystem::temp_directory_path() /
                    ("ckp-acceptance-" + std::to_string(static_cast<unsigned long long>(
                                             std::chrono::steady_clock::now().time_since_epoch().count())));
  struct Case {
    const char* name;
    RunConfig config;
  };
  RunConfig survival;
  survival.params = ModelParams::simple(prob("0.2"), CheckDepth::bounded(5));
  survival.t_max = 10000;
  survival.trials = 500;
  survival.seed = ctx.seed_for(14);
  RunConfig general = survival;
  general.params = ModelParams{prob("0.3"), prob("0.1"), CheckDepth::bounded(3)};
  general.init = GeneralRootCT{};
  general.tracking = Tracking::FirstCF;
  general.trials = 100;
  general.t_max = 4000;

  bool pass = true;
  std::ostringstream s;
  int index = 0;
  for (Case c : {Case{"p=0.2 k=5 simulate", survival}, Case{"eps=0.3 p=0.1 k=3 first-cf simulate", general}}) {
    ++index;
    std::string files[2][2];
    for (int run = 0; run < 2; ++run) {
      c.config.threads = run == 0 ? 1 : 4;
      c.config.output_dir = root / (std::to_string(index) + (run == 0 ? "-a" : "-b"));
      std::filesystem::create_directories(c.config.output_dir);
      execute(c.config);
      files[run][0] = slurp(c.config.output_dir / "series.csv");
      files[run][1] = slurp(c.config.output_dir / "summary.json");
      std::filesystem::remove_all(c.config.output_dir);
    }
    const bool same = files[0][0] == files[1][0] && files[0][1] == files[1][1] && !files[0][0].empty();
    pass = pass && same;
    s << "\n    " << c.name << ", threads 1 vs 4: series.csv " << files[0][0].size() << " bytes, summary.json "
      << files[0][1].size() << " bytes, " << (same ? "identical" : "DIFFER");
  }
  std::filesystem::remove_all(root);
  return {pass, (pass ? std::string("byte-identical outputs") : std::string("outputs differ")) + s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs the acceptance criteria and prints one PASS/FAIL line for each."};
  std::vector<int> only;
  Context ctx;
  if (const char* env = std::getenv("CKP_THREADS")) ctx.threads = static_cast<unsigned>(std::max(1, std::atoi(env)));
  app.add_option("--only", only, "Criteria to run (default all)")->check(CLI::Range(1, 14));
  app.add_option("--threads", ctx.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", ctx.seed, "Master seed");
  CLI11_PARSE(app, argc, argv);

  using Fn = Verdict (*)(const Context&);
  const Fn criteria[] = {exp_contraction_simple, lc_drift_simple, combined_submartingale, general_certificates,
                         oracle_equivalence,     elimination,     survival_simple,       shallow_survival,
                         survival_general,       high_reliability, component_scaling,    urn,
                         tau_tail,               determinism};
  if (only.empty()) {
    for (int i = 1; i <= 14; ++i) only.push_back(i);
  }
  int failures = 0;
  for (int n : only) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[n - 1](ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << "  [" << num(secs)
              << " s]" << std::endl;
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
