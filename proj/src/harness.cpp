#include "ckp/harness.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "ckp/error.hpp"
#include "ckp/evolution.hpp"
#include "ckp/oracle.hpp"
#include "ckp/parallel.hpp"

namespace ckp {

const char* const kVersion = "1.0.0";

const char* const kSeriesHeader =
    "trial,t,n_nodes,n_pt,n_true_pt,n_false_pt,n_pf,n_components,max_component,m_t,height,uni,iuni,phi_exp,phi_lc,"
    "extinct";

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kRegimeNote =
    "surviving: Wilson 95% lower bound > 0 at t_max and frequency(t_max) >= frequency(t_max/2) - 2 SE; "
    "eliminating: Wilson 95% upper bound < 0.01 and >= 99% of deaths before t_max/2. Thresholds are conventions of "
    "this tool.";

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ojson interval_json(const Interval& i) { return ojson::array({i.low, i.high}); }

ojson mean_se_json(const MeanSE& m) { return ojson{{"mean", m.mean}, {"se", m.se}, {"n", m.n}}; }

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + (dir / name).string());
  return f;
}

void write_json(const std::filesystem::path& dir, const std::string& name, const ojson& j) {
  auto f = open_output(dir, name);
  f << j.dump(2) << '\n';
  if (!f) throw Error("write failed: " + (dir / name).string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson params_json(const ModelParams& params) {
  return ojson{{"epsilon", params.epsilon.str()}, {"p", params.p.str()}, {"k", params.k.str()}};
}

ojson conditions_json(const ModelParams& params) {
  const mpq_class elim = elimination_margin(params);
  const mpq_class surv = survival_margin(params);
  return ojson{{"elimination_margin", elim.get_str()},
               {"elimination_margin_approx", elim.get_d()},
               {"survival_margin", surv.get_str()},
               {"survival_margin_approx", surv.get_d()},
               {"combined_admissible", combined_admissible(params.p, params.k)}};
}

MetricsPlan plan_for(const RunConfig& c) {
  return c.metrics_times.empty() ? MetricsPlan::geometric(c.t_max) : MetricsPlan::explicit_times(c.metrics_times);
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string text_of(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) {
    std::ostringstream s;
    s << v.get<double>();
    return s.str();
  }
  throw ConfigError("expected a number or string, got " + v.dump());
}

// ---- simulate ----

ojson survival_json(const SurvivalEstimate& e) {
  ojson hist = ojson::array();
  for (const auto& [bin, count] : e.death_histogram) hist.push_back(ojson{{"from", bin}, {"count", count}});
  return ojson{{"trials", e.trials},
               {"t_max", e.t_max},
               {"survivors", e.survivors},
               {"frequency", e.frequency},
               {"se", e.se},
               {"wilson95", interval_json(e.ci)},
               {"survivors_half", e.survivors_half},
               {"frequency_half", e.frequency_half},
               {"se_half", e.se_half},
               {"wilson95_half", interval_json(e.ci_half)},
               {"untracked", e.untracked},
               {"deaths", e.deaths.size()},
               {"deaths_before_half", e.deaths_before(e.t_max / 2)},
               {"death_histogram", hist}};
}

ojson regime_json(const SurvivalEstimate& e) {
  std::string label = "insufficient-trials";
  if (e.trials >= 100) label = std::string(to_string(classify_regime(e)));
  return ojson{{"label", label}, {"rule", kRegimeNote}};
}

ModeResult run_simulate(const RunConfig& c) {
  TrialOptions opt;
  opt.params = c.params;
  opt.init = c.init;
  opt.t_max = c.t_max;
  opt.tracking = c.tracking;
  opt.series_plan = plan_for(c);
  opt.track_running_max = true;
  std::vector<std::string> events(c.events ? c.trials : 0);
  if (c.events) {
    opt.on_step = [&events](std::uint64_t trial, const StepOutcome& o, const KnowledgeState& s) {
      ojson j{{"trial", trial},
              {"t", s.clock()},
              {"parent", o.parent},
              {"node", o.new_node},
              {"label", to_string(o.child_label)},
              {"checked", o.checked},
              {"marked", o.marked_path}};
      events[trial] += j.dump();
      events[trial] += '\n';
    };
  }
  const auto summaries = run_trials(opt, c.trials, c.seed, c.threads);

  ModeResult result;
  {
    auto f = open_output(c.output_dir, "series.csv");
    f << kSeriesHeader << '\n';
    for (const auto& s : summaries) {
      for (const auto& m : s.series) write_series_row(f, s.trial, m);
    }
    result.files.push_back("series.csv");
  }
  if (c.events) {
    auto f = open_output(c.output_dir, "events.jsonl");
    for (const auto& e : events) f << e;
    result.files.push_back("events.jsonl");
  }

  const SurvivalEstimate survival = summarize_survival(summaries, c.t_max);
  const double eps = c.params.epsilon.value();
  const double q = 1.0 - c.params.p.value();
  std::vector<double> nodes, pt, true_pt, false_pt, max_comp, balance, running;
  std::uint64_t max_comp_overall = 0;
  for (const auto& s : summaries) {
    if (!s.running_max.empty()) running.push_back(static_cast<double>(s.running_max.back()));
    const auto& m = s.final_metrics;
    nodes.push_back(static_cast<double>(m.n_nodes));
    pt.push_back(static_cast<double>(m.n_pt));
    true_pt.push_back(static_cast<double>(m.n_true_pt));
    false_pt.push_back(static_cast<double>(m.n_false_pt));
    max_comp.push_back(static_cast<double>(m.max_component));
    balance.push_back((1 - eps) * static_cast<double>(m.n_false_pt) - eps * q * static_cast<double>(m.n_true_pt));
    max_comp_overall = std::max(max_comp_overall, m.max_component);
  }
  ojson summary{{"mode", "simulate"},
                {"params", params_json(c.params)},
                {"conditions", conditions_json(c.params)},
                {"init", init_name(c.init)},
                {"tracking", to_string(c.tracking)},
                {"trials", c.trials},
                {"t_max", c.t_max},
                {"seed", c.seed},
                {"survival", survival_json(survival)},
                {"regime", regime_json(survival)},
                {"final",
                 {{"n_nodes", mean_se_json(mean_se(nodes))},
                  {"n_pt", mean_se_json(mean_se(pt))},
                  {"n_true_pt", mean_se_json(mean_se(true_pt))},
                  {"n_false_pt", mean_se_json(mean_se(false_pt))},
                  {"max_component", mean_se_json(mean_se(max_comp))},
                  {"max_component_overall", max_comp_overall},
                  {"running_max_component", mean_se_json(mean_se(running))}}},
                {"false_pt_ratio", mean_se_json(reliability_ratio(summaries))},
                {"reliability_balance", mean_se_json(mean_se(balance))}};
  write_json(c.output_dir, "summary.json", summary);
  result.files.push_back("summary.json");
  return result;
}

// ---- sweep ----

ModeResult run_sweep(const RunConfig& c) {
  const SweepGrid& g = *c.grid;
  ModeResult result;
  auto phase = open_output(c.output_dir, "phase.csv");
  phase << "epsilon,p,k,trials,t_max,survivors,frequency,wilson_low,wilson_high,survivors_half,frequency_half,"
           "deaths_before_half,regime\n";
  ojson cells = ojson::array();
  std::uint64_t cell_index = 0;
  for (const auto& eps : g.epsilon) {
    for (const auto& p : g.p) {
      for (const auto& k : g.k) {
        const ModelParams params{eps, p, k};
        // Cells draw from disjoint master seeds.
        const std::uint64_t seed = RandomStream::split(c.seed, cell_index++).next_u64();
        const auto e = survival_estimate(params, c.init, g.trials, g.t_max, seed, c.threads, c.tracking);
        const std::string regime = e.trials >= 100 ? std::string(to_string(classify_regime(e))) : "insufficient-trials";
        phase << eps.str() << ',' << p.str() << ',' << k.str() << ',' << e.trials << ',' << e.t_max << ','
              << e.survivors << ',' << format_double(e.frequency) << ',' << format_double(e.ci.low) << ','
              << format_double(e.ci.high) << ',' << e.survivors_half << ',' << format_double(e.frequency_half) << ','
              << format_double(e.deaths_before(e.t_max / 2)) << ',' << regime << '\n';
        cells.push_back(ojson{{"params", params_json(params)}, {"seed", seed}, {"survival", survival_json(e)},
                              {"regime", regime}});
      }
    }
  }
  result.files.push_back("phase.csv");
  write_json(c.output_dir, "summary.json",
             ojson{{"mode", "sweep"}, {"init", init_name(c.init)}, {"tracking", to_string(c.tracking)},
                   {"grid", to_json(g)}, {"seed", c.seed}, {"regime_rule", kRegimeNote}, {"cells", cells}});
  result.files.push_back("summary.json");
  return result;
}

// ---- drift ----

ModeResult run_drift(const RunConfig& c) {
  const PotentialKind kind = c.potential;
  const auto [default_value, relation] = default_bound(kind, c.params);
  const mpq_class bound = c.bound ? parse_rational(*c.bound) : default_value;
  const bool needs_positive = kind == PotentialKind::Exp || kind == PotentialKind::LC;

  struct Item {
    std::string source;
    KnowledgeState state;
  };
  std::vector<Item> items;
  const auto harvested = harvest_states(c.params, c.init, c.states, c.t_max, c.seed, [&](const KnowledgeState& s) {
    return !needs_positive || sgn(evaluate(s, kind)) > 0;
  });
  for (const auto& s : harvested) items.push_back({"trajectory", s});
  if (c.extremal) {
    for (auto& n : extremal_states(c.params, !c.params.epsilon.is_zero())) {
      if (needs_positive && sgn(evaluate(n.state, kind)) == 0) continue;
      items.push_back({"extremal:" + n.name, std::move(n.state)});
    }
  }

  std::vector<DriftCertificate> certs(items.size());
  parallel_for(items.size(), c.threads,
               [&](std::uint64_t i) { certs[i] = drift_certificate(items[i].state, kind, bound, relation); });

  ModeResult result;
  std::uint64_t satisfied = 0;
  std::optional<mpq_class> lowest, highest, min_delta, max_delta;
  mpq_class max_abs(0);
  std::uint64_t abs_le_2 = 0;
  // Simple-model LC runs also report the weaker constant 1/2 - 5p/2.
  const bool alt = kind == PotentialKind::LC && c.params.epsilon.is_zero();
  const mpq_class alt_bound = mpq_class(1, 2) - mpq_class(5, 2) * c.params.p.exact();
  std::uint64_t alt_satisfied = 0;
  {
    auto f = open_output(c.output_dir, "certificates.jsonl");
    for (std::size_t i = 0; i < certs.size(); ++i) {
      const auto& cert = certs[i];
      satisfied += cert.satisfied;
      abs_le_2 += cert.max_abs_delta <= 2;
      alt_satisfied += alt && cert.expected_delta > alt_bound;
      if (!lowest || cert.expected_delta < *lowest) lowest = cert.expected_delta;
      if (!highest || cert.expected_delta > *highest) highest = cert.expected_delta;
      if (!min_delta || cert.min_delta < *min_delta) min_delta = cert.min_delta;
      if (!max_delta || cert.max_delta > *max_delta) max_delta = cert.max_delta;
      if (cert.max_abs_delta > max_abs) max_abs = cert.max_abs_delta;
      ojson j{{"index", i},
              {"source", items[i].source},
              {"nodes", items[i].state.size()},
              {"digest_fnv1a", fnv1a(cert.digest)},
              {"potential_value", cert.potential_value.get_str()},
              {"expected_delta", cert.expected_delta.get_str()},
              {"expected_delta_approx", cert.expected_delta.get_d()},
              {"bound", cert.bound.get_str()},
              {"relation", to_string(cert.relation)},
              {"satisfied", cert.satisfied},
              {"support_size", cert.support_size},
              {"min_delta", cert.min_delta.get_str()},
              {"max_delta", cert.max_delta.get_str()},
              {"max_abs_delta", cert.max_abs_delta.get_str()}};
      f << j.dump() << '\n';
    }
    result.files.push_back("certificates.jsonl");
  }
  auto str = [](const std::optional<mpq_class>& v) { return v ? ojson(v->get_str()) : ojson(); };
  ojson summary{{"mode", "drift"},
                {"params", params_json(c.params)},
                {"conditions", conditions_json(c.params)},
                {"init", init_name(c.init)},
                {"potential", to_string(kind)},
                {"claim", std::string("E[delta] ") + std::string(to_string(relation)) + " " + bound.get_str()},
                {"certificates", certs.size()},
                {"harvested", harvested.size()},
                {"extremal", certs.size() - harvested.size()},
                {"satisfied", satisfied},
                {"all_satisfied", satisfied == certs.size()},
                {"lowest_expected_delta", str(lowest)},
                {"highest_expected_delta", str(highest)},
                {"min_delta", str(min_delta)},
                {"max_delta", str(max_delta)},
                {"max_abs_delta", max_abs.get_str()},
                {"states_with_max_abs_delta_le_2", abs_le_2}};
  if (alt) {
    summary["alternate_bound"] = ojson{{"claim", "E[delta] > " + alt_bound.get_str()}, {"satisfied", alt_satisfied}};
  }
  write_json(c.output_dir, "summary.json", summary);
  result.files.push_back("summary.json");
  result.exit_code = satisfied == certs.size() ? 0 : 1;
  return result;
}

// ---- oracle-validate ----

ModeResult run_oracle(const RunConfig& c) {
  const Enumeration exact = enumerate(c.params, c.init, c.horizon, c.budget);
  ModeResult result;
  {
    auto f = open_output(c.output_dir, "atoms.jsonl");
    write_atoms_jsonl(f, exact);
    result.files.push_back("atoms.jsonl");
  }
  const DigestCounts sample = sample_digests(c.params, c.init, c.horizon, c.trials, c.seed, c.threads);
  ojson summary{{"mode", "oracle-validate"},
                {"params", params_json(c.params)},
                {"init", init_name(c.init)},
                {"horizon", c.horizon},
                {"samples", c.trials},
                {"seed", c.seed},
                {"branch_visits", exact.branch_visits},
                {"support_size", exact.atoms.size()},
                {"total_probability", exact.total_probability().get_str()},
                {"expected_phi_exp", exact.expected_phi_exp.get_str()},
                {"expected_phi_lc", exact.expected_phi_lc.get_str()},
                {"survival_probability", exact.survival_probability.get_str()},
                {"error_free_probability", exact.error_free_probability.get_str()}};
  try {
    const Comparison cmp = compare(sample, exact);
    summary["in_support"] = true;
    summary["observed_support"] = cmp.observed_support;
    summary["total_variation"] = cmp.total_variation;
    summary["expected_total_variation"] = cmp.expected_total_variation;
    summary["chi_square"] = cmp.chi_square;
    summary["dof"] = cmp.dof;
    summary["p_value"] = cmp.p_value;
  } catch (const SupportViolation& v) {
    summary["in_support"] = false;
    summary["outside_digest"] = v.digest();
    result.exit_code = 1;
  }
  write_json(c.output_dir, "summary.json", summary);
  result.files.push_back("summary.json");
  return result;
}

// ---- urn ----

ModeResult run_urn(const RunConfig& c) {
  std::vector<double> x(c.trials), x2(c.trials), tail(c.trials);
  const std::uint64_t threshold = (c.urn_t0 + 1) / 2;
  parallel_for(c.trials, c.threads, [&](std::uint64_t i) {
    RandomStream rng = RandomStream::split(c.seed, i);
    const auto v = static_cast<double>(polya_urn_sample(c.urn_t0, c.urn_t, rng));
    x[i] = v;
    x2[i] = v * v;
    tail[i] = v >= static_cast<double>(threshold) ? 1.0 : 0.0;
  });
  const UrnMoments exact = polya_urn_moments(c.urn_t0, c.urn_t);
  const mpq_class exact_tail = polya_urn_tail(c.urn_t0, c.urn_t, threshold);
  const MeanSE m1 = mean_se(x), m2 = mean_se(x2), mt = mean_se(tail);
  auto z = [](const MeanSE& m, double target) { return m.se > 0 ? (m.mean - target) / m.se : 0.0; };
  write_json(c.output_dir, "summary.json",
             ojson{{"mode", "urn"},
                   {"t0", c.urn_t0},
                   {"t", c.urn_t},
                   {"runs", c.trials},
                   {"seed", c.seed},
                   {"mean", {{"exact", exact.mean.get_str()}, {"sample", mean_se_json(m1)},
                             {"z", z(m1, exact.mean.get_d())}}},
                   {"second_moment", {{"exact", exact.second_moment.get_str()}, {"sample", mean_se_json(m2)},
                                      {"z", z(m2, exact.second_moment.get_d())}}},
                   {"tail", {{"threshold", threshold}, {"exact", exact_tail.get_str()},
                             {"exact_approx", exact_tail.get_d()}, {"sample", mean_se_json(mt)}}}});
  return ModeResult{0, {"summary.json"}};
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Simulate: return "simulate";
    case Mode::Sweep: return "sweep";
    case Mode::Drift: return "drift";
    case Mode::OracleValidate: return "oracle-validate";
    case Mode::Urn: return "urn";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::Simulate, Mode::Sweep, Mode::Drift, Mode::OracleValidate, Mode::Urn}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

void RunConfig::validate() const {
  if (t_max < 1) throw ConfigError("t_max must be at least 1");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  for (std::size_t i = 1; i < metrics_times.size(); ++i) {
    if (metrics_times[i] <= metrics_times[i - 1]) throw ConfigError("metrics times must be strictly increasing");
  }
  if (mode == Mode::Sweep) {
    if (!grid) throw ConfigError("sweep needs a grid");
    if (grid->cells() == 0) throw ConfigError("sweep grid is empty");
    if (grid->trials < 1 || grid->t_max < 1) throw ConfigError("sweep grid needs trials and t_max >= 1");
  }
  if (mode == Mode::Drift && states < 1) throw ConfigError("drift needs at least one state");
  if (mode == Mode::Drift && bound) parse_rational(*bound);
  if (mode == Mode::OracleValidate && budget < 1) throw ConfigError("budget must be positive");
  if (mode == Mode::Urn && urn_t0 < 2) throw ConfigError("urn t0 must be at least 2");
  if (mode == Mode::Drift && potential == PotentialKind::Combined && !params.k.is_bounded()) {
    throw ConfigError("the combined potential needs a bounded k");
  }
  if (mode == Mode::Drift && potential == PotentialKind::Combined && !params.epsilon.is_zero()) {
    throw ConfigError("combined-potential certificates are implemented for epsilon = 0 only");
  }
  if (mode == Mode::Drift && potential == PotentialKind::Reliability && params.epsilon.is_one()) {
    throw ConfigError("the reliability potential is undefined at epsilon = 1");
  }
}

ojson to_json(const SweepGrid& g) {
  ojson eps = ojson::array(), p = ojson::array(), k = ojson::array();
  for (const auto& v : g.epsilon) eps.push_back(v.str());
  for (const auto& v : g.p) p.push_back(v.str());
  for (const auto& v : g.k) k.push_back(v.str());
  return ojson{{"epsilon", eps}, {"p", p}, {"k", k}, {"trials", g.trials}, {"t_max", g.t_max}};
}

SweepGrid grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("grid must be a JSON object");
  SweepGrid g;
  auto list = [&](const char* key, auto parse, auto& out) {
    if (!j.contains(key)) return false;
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigError(std::string("grid key '") + key + "' must be a list");
    for (const auto& x : v) out.push_back(parse(text_of(x)));
    return true;
  };
  if (!list("epsilon", Probability::parse, g.epsilon)) g.epsilon.push_back(Probability());
  list("p", Probability::parse, g.p);
  list("k", CheckDepth::parse, g.k);
  g.trials = get_or<std::uint64_t>(j, "trials", g.trials);
  g.t_max = get_or<std::uint64_t>(j, "t_max", g.t_max);
  return g;
}

ojson to_json(const RunConfig& c) {
  ojson times = c.metrics_times.empty() ? ojson("geometric") : ojson(c.metrics_times);
  return ojson{{"mode", to_string(c.mode)},
               {"epsilon", c.params.epsilon.str()},
               {"p", c.params.p.str()},
               {"k", c.params.k.str()},
               {"init", init_name(c.init)},
               {"t_max", c.t_max},
               {"trials", c.trials},
               {"seed", c.seed},
               {"metrics_times", times},
               {"output_dir", c.output_dir.string()},
               {"threads", c.threads},
               {"tracking", to_string(c.tracking)},
               {"events", c.events},
               {"potential", to_string(c.potential)},
               {"states", c.states},
               {"extremal", c.extremal},
               {"bound", c.bound ? ojson(*c.bound) : ojson()},
               {"horizon", c.horizon},
               {"budget", c.budget},
               {"urn_t0", c.urn_t0},
               {"urn_t", c.urn_t},
               {"grid", c.grid ? to_json(*c.grid) : ojson()}};
}

RunConfig config_from_json(const nlohmann::json& input) {
  const nlohmann::json& j = input.contains("config") ? input.at("config") : input;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"mode",    "epsilon", "p",         "k",      "init",   "t_max",
                                           "trials",  "seed",    "metrics_times", "output_dir", "threads",
                                           "tracking", "events", "potential", "states", "extremal", "bound",
                                           "horizon", "budget",  "urn_t0",    "urn_t",  "grid"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  if (j.contains("mode")) c.mode = parse_mode(get_or<std::string>(j, "mode", ""));
  if (j.contains("epsilon")) c.params.epsilon = Probability::parse(text_of(j.at("epsilon")));
  if (j.contains("p")) c.params.p = Probability::parse(text_of(j.at("p")));
  if (j.contains("k")) c.params.k = CheckDepth::parse(text_of(j.at("k")));
  if (j.contains("init")) c.init = parse_init(get_or<std::string>(j, "init", ""));
  c.t_max = get_or<std::uint64_t>(j, "t_max", c.t_max);
  c.trials = get_or<std::uint64_t>(j, "trials", c.trials);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("metrics_times") && !j.at("metrics_times").is_string()) {
    c.metrics_times = get_or<std::vector<std::uint64_t>>(j, "metrics_times", {});
  } else if (j.contains("metrics_times") && j.at("metrics_times") != "geometric") {
    throw ConfigError("metrics_times must be \"geometric\" or a list of times");
  }
  c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
  c.threads = get_or<unsigned>(j, "threads", c.threads);
  if (j.contains("tracking")) c.tracking = parse_tracking(get_or<std::string>(j, "tracking", ""));
  c.events = get_or<bool>(j, "events", c.events);
  if (j.contains("potential")) c.potential = parse_potential(get_or<std::string>(j, "potential", ""));
  c.states = get_or<std::uint64_t>(j, "states", c.states);
  c.extremal = get_or<bool>(j, "extremal", c.extremal);
  if (j.contains("bound") && !j.at("bound").is_null()) c.bound = text_of(j.at("bound"));
  c.horizon = get_or<std::uint64_t>(j, "horizon", c.horizon);
  c.budget = get_or<std::uint64_t>(j, "budget", c.budget);
  c.urn_t0 = get_or<std::uint64_t>(j, "urn_t0", c.urn_t0);
  c.urn_t = get_or<std::uint64_t>(j, "urn_t", c.urn_t);
  if (j.contains("grid") && !j.at("grid").is_null()) c.grid = grid_from_json(j.at("grid"));
  return c;
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

std::pair<mpq_class, Relation> default_bound(PotentialKind kind, const ModelParams& params) {
  switch (kind) {
    case PotentialKind::Exp: return {mpq_class(0), Relation::Less};
    case PotentialKind::LC: return {mpq_class(mpq_class(1, 2) - 2 * params.p.exact()), Relation::Greater};
    case PotentialKind::Combined: return {mpq_class(0), Relation::Greater};
    case PotentialKind::Reliability: return {mpq_class(0), Relation::GreaterEq};
  }
  return {mpq_class(0), Relation::Less};
}

void write_series_row(std::ostream& out, std::uint64_t trial, const MetricsRecord& m) {
  out << trial << ',' << m.t << ',' << m.n_nodes << ',' << m.n_pt << ',' << m.n_true_pt << ',' << m.n_false_pt << ','
      << m.n_pf << ',' << m.n_components << ',' << m.max_component << ',' << m.m_t << ',' << m.height << ',' << m.uni
      << ',' << m.iuni << ',' << m.potentials.phi_exp.get_str() << ',' << m.potentials.phi_lc.get_str() << ','
      << (m.extinct ? 1 : 0) << '\n';
}

ModeResult execute(const RunConfig& config) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.output_dir.string() + ": " + ec.message());
  write_json(config.output_dir, "manifest.json",
             ojson{{"tool", "ckp"},
                   {"version", kVersion},
                   {"timestamp", utc_timestamp()},
                   {"seed", config.seed},
                   {"config", to_json(config)}});
  ModeResult result;
  switch (config.mode) {
    case Mode::Simulate: result = run_simulate(config); break;
    case Mode::Sweep: result = run_sweep(config); break;
    case Mode::Drift: result = run_drift(config); break;
    case Mode::OracleValidate: result = run_oracle(config); break;
    case Mode::Urn: result = run_urn(config); break;
  }
  result.files.insert(result.files.begin(), "manifest.json");
  return result;
}

namespace {

struct Flags {
  std::string config, epsilon, p, k, init, metrics_times, out, tracking, potential, bound, grid;
  std::uint64_t t_max = 0, trials = 0, seed = 0, states = 0, horizon = 0, budget = 0, t0 = 0, t = 0;
  unsigned threads = 0;
  bool events = false, no_extremal = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config or manifest to start from");
  cmd->add_option("--epsilon", f.epsilon, "error probability (decimal or fraction)");
  cmd->add_option("--p", f.p, "check probability (decimal or fraction)");
  cmd->add_option("--k", f.k, "check depth: positive integer or inf");
  cmd->add_option("--init", f.init, "simple | general | univalent:N");
  cmd->add_option("--t-max", f.t_max, "steps per trial");
  cmd->add_option("--trials", f.trials, "independent trials");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--threads", f.threads, "worker threads (CKP_THREADS overrides)");
  cmd->add_option("--out", f.out, "output directory");
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and verifier for the checked knowledge process", "ckp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags f;
  auto* simulate = app.add_subcommand("simulate", "run independent trials and record metrics");
  auto* sweep = app.add_subcommand("sweep", "survival estimates over a parameter grid");
  auto* drift = app.add_subcommand("drift", "exact one-step drift certificates");
  auto* oracle = app.add_subcommand("oracle-validate", "compare the simulator with exact enumeration");
  auto* urn = app.add_subcommand("urn", "Polya urn sampler against exact moments");
  for (auto* cmd : {simulate, sweep, drift, oracle, urn}) add_common(cmd, f);
  simulate->add_option("--metrics-times", f.metrics_times, "geometric or comma-separated times");
  simulate->add_option("--tracking", f.tracking, "whole | first-cf");
  simulate->add_flag("--events", f.events, "write events.jsonl");
  sweep->add_option("--grid", f.grid, "JSON grid: epsilon, p, k lists plus trials and t_max");
  sweep->add_option("--tracking", f.tracking, "whole | first-cf");
  drift->add_option("--potential", f.potential, "exp | lc | combined | reliability");
  drift->add_option("--states", f.states, "states harvested from trajectories");
  drift->add_option("--bound", f.bound, "claimed bound (rational)");
  drift->add_flag("--no-extremal", f.no_extremal, "skip the hand-built extremal states");
  oracle->add_option("--horizon", f.horizon, "steps to enumerate");
  oracle->add_option("--samples", f.trials, "simulator samples");
  oracle->add_option("--budget", f.budget, "branch-visit budget");
  urn->add_option("--t0", f.t0, "initial ball count");
  urn->add_option("--t", f.t, "draws");
  urn->add_option("--runs", f.trials, "sampler runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    RunConfig c;
    if (!f.config.empty()) {
      std::ifstream in(f.config);
      if (!in) throw ConfigError("cannot read config " + f.config);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + f.config + ": " + e.what());
      }
      c = config_from_json(j);
    }
    c.mode = parse_mode(cmd->get_name());
    auto given = [&](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };
    if (given("--epsilon")) c.params.epsilon = Probability::parse(f.epsilon);
    if (given("--p")) c.params.p = Probability::parse(f.p);
    if (given("--k")) c.params.k = CheckDepth::parse(f.k);
    if (given("--init")) c.init = parse_init(f.init);
    if (given("--t-max")) c.t_max = f.t_max;
    if (given("--trials") || given("--samples") || given("--runs")) c.trials = f.trials;
    if (given("--seed")) c.seed = f.seed;
    if (given("--threads")) c.threads = f.threads;
    if (given("--out")) c.output_dir = f.out;
    if (given("--tracking")) c.tracking = parse_tracking(f.tracking);
    if (given("--events")) c.events = f.events;
    if (given("--potential")) c.potential = parse_potential(f.potential);
    if (given("--states")) c.states = f.states;
    if (given("--bound")) c.bound = f.bound;
    if (given("--no-extremal")) c.extremal = false;
    if (given("--horizon")) c.horizon = f.horizon;
    if (given("--budget")) c.budget = f.budget;
    if (given("--t0")) c.urn_t0 = f.t0;
    if (given("--t")) c.urn_t = f.t;
    if (given("--metrics-times")) {
      c.metrics_times.clear();
      if (f.metrics_times != "geometric") {
        std::stringstream ss(f.metrics_times);
        std::string item;
        while (std::getline(ss, item, ',')) {
          try {
            std::size_t used = 0;
            c.metrics_times.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
          } catch (const std::logic_error&) {
            throw ConfigError("bad metrics time '" + item + "'");
          }
        }
      }
    }
    if (given("--grid")) {
      std::ifstream in(f.grid);
      if (!in) throw ConfigError("cannot read grid " + f.grid);
      try {
        c.grid = grid_from_json(nlohmann::json::parse(in));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("grid " + f.grid + ": " + e.what());
      }
    }
    if (const char* env = std::getenv("CKP_THREADS"); env && *env) {
      try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(env, &used);
        if (used != std::string(env).size() || v == 0) throw std::invalid_argument(env);
        c.threads = static_cast<unsigned>(v);
      } catch (const std::logic_error&) {
        throw ConfigError(std::string("CKP_THREADS must be a positive integer, got '") + env + "'");
      }
    }
    const ModeResult r = execute(c);
    for (const auto& file : r.files) out << (c.output_dir / file).string() << '\n';
    return r.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const BudgetExceeded& e) {
    err << "refused: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ckp
