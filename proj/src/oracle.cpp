#include "ckp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "ckp/decomposition.hpp"
#include "ckp/error.hpp"
#include "ckp/evolution.hpp"
#include "ckp/parallel.hpp"
#include "ckp/potentials.hpp"
#include "ckp/stats.hpp"

namespace ckp {

namespace {

struct Node {
  KnowledgeState state;
  mpq_class probability;
};

bool error_free(const KnowledgeState& s) {
  const auto truth = true_flags(s);
  for (const auto& rec : s.nodes()) {
    if (is_pt(rec.label) && !truth[rec.id]) return false;
  }
  return true;
}

}  // namespace

mpq_class Enumeration::total_probability() const {
  mpq_class sum(0);
  for (const auto& a : atoms) sum += a.probability;
  return sum;
}

const TrajectoryAtom* Enumeration::find(const std::string& digest) const {
  const auto it = std::lower_bound(atoms.begin(), atoms.end(), digest,
                                   [](const TrajectoryAtom& a, const std::string& d) { return a.digest < d; });
  return it != atoms.end() && it->digest == digest ? &*it : nullptr;
}

Enumeration enumerate(const KnowledgeState& start, std::uint64_t horizon, std::uint64_t budget) {
  Enumeration out;
  out.horizon = horizon;
  std::map<std::string, Node> level;
  level.emplace(start.digest(), Node{start, mpq_class(1)});

  for (std::uint64_t depth = 0; depth < horizon; ++depth) {
    std::map<std::string, Node> next;
    for (auto& [digest, node] : level) {
      if (node.state.extinct()) {
        ++out.branch_visits;
        if (out.branch_visits > budget) throw BudgetExceeded(budget, static_cast<int>(depth));
        auto [it, inserted] = next.try_emplace(digest, Node{node.state, 0});
        it->second.probability += node.probability;
        continue;
      }
      for (const auto& w : one_step_support(node.state).outcomes) {
        if (++out.branch_visits > budget) throw BudgetExceeded(budget, static_cast<int>(depth));
        KnowledgeState child = node.state;
        apply_choice(child, w.outcome.parent, w.outcome.child_label, w.outcome.checked);
        std::string d = child.digest();
        auto it = next.find(d);
        if (it == next.end()) it = next.emplace(std::move(d), Node{std::move(child), 0}).first;
        it->second.probability += node.probability * w.probability;
      }
    }
    level = std::move(next);
  }

  out.expected_phi_exp = 0;
  out.expected_phi_lc = 0;
  out.survival_probability = 0;
  out.error_free_probability = 0;
  out.atoms.reserve(level.size());
  for (auto& [digest, node] : level) {
    node.probability.canonicalize();
    if (sgn(node.probability) == 0) continue;
    TrajectoryAtom atom;
    atom.probability = node.probability;
    atom.digest = digest;
    atom.terminal_time = node.state.clock();
    if (node.state.extinct()) {
      atom.extinct_at = node.state.clock();
    } else {
      out.survival_probability += node.probability;
    }
    if (error_free(node.state)) out.error_free_probability += node.probability;
    out.expected_phi_exp += node.probability * mpq_class(phi_exp(node.state));
    out.expected_phi_lc += node.probability * phi_lc(node.state);
    out.atoms.push_back(std::move(atom));
  }
  out.expected_phi_exp.canonicalize();
  out.expected_phi_lc.canonicalize();
  out.survival_probability.canonicalize();
  out.error_free_probability.canonicalize();
  return out;
}

Enumeration enumerate(const ModelParams& params, const InitKind& init, std::uint64_t horizon,
                      std::uint64_t budget) {
  return enumerate(KnowledgeState(params, init), horizon, budget);
}

DigestCounts sample_digests(const ModelParams& params, const InitKind& init, std::uint64_t horizon,
                            std::uint64_t samples, std::uint64_t seed, unsigned threads) {
  std::vector<std::string> digests(samples);
  parallel_for(samples, threads, [&](std::uint64_t i) {
    KnowledgeState state(params, init);
    RandomStream rng = RandomStream::split(seed, i);
    run(state, rng, RunOptions{horizon, true, MetricsPlan::explicit_times({})});
    digests[i] = state.digest();
  });
  DigestCounts counts;
  for (auto& d : digests) ++counts[std::move(d)];
  return counts;
}

Comparison compare(const DigestCounts& empirical, const Enumeration& exact) {
  Comparison c;
  for (const auto& [digest, count] : empirical) {
    if (count == 0) continue;
    if (!exact.find(digest)) throw SupportViolation(digest);
    c.samples += count;
    ++c.observed_support;
  }
  if (c.samples == 0) throw Error("compare: empty empirical sample");
  c.support_size = exact.atoms.size();
  const double n = static_cast<double>(c.samples);

  double tv = 0.0;
  double pooled_expected = 0.0, pooled_observed = 0.0;
  std::uint64_t bins = 0;
  for (const auto& atom : exact.atoms) {
    const double q = atom.probability.get_d();
    const auto it = empirical.find(atom.digest);
    const double observed = it == empirical.end() ? 0.0 : static_cast<double>(it->second);
    tv += std::abs(observed / n - q);
    const double expected = n * q;
    if (expected < 5.0) {
      pooled_expected += expected;
      pooled_observed += observed;
      continue;
    }
    c.chi_square += (observed - expected) * (observed - expected) / expected;
    ++bins;
  }
  if (pooled_expected > 0) {
    c.chi_square += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / pooled_expected;
    ++bins;
  }
  c.total_variation = tv / 2;
  c.dof = bins > 0 ? bins - 1 : 0;
  c.p_value = chi_square_sf(c.chi_square, static_cast<double>(c.dof));
  c.expected_total_variation = expected_total_variation(exact, c.samples);
  return c;
}

double expected_total_variation(const Enumeration& exact, std::uint64_t samples) {
  double sum = 0.0;
  for (const auto& atom : exact.atoms) sum += binomial_mean_abs_deviation(samples, atom.probability.get_d());
  return sum / 2;
}

void write_atoms_jsonl(std::ostream& out, const Enumeration& exact) {
  for (const auto& atom : exact.atoms) {
    nlohmann::ordered_json j;
    j["probability"] = atom.probability.get_str();
    j["digest"] = atom.digest;
    j["terminal_time"] = atom.terminal_time;
    j["extinct_at"] = atom.extinct_at ? nlohmann::ordered_json(*atom.extinct_at) : nlohmann::ordered_json();
    out << j.dump() << '\n';
  }
}

}  // namespace ckp
