#include "ckp/potentials.hpp"

#include <cmath>
#include <map>

#include "ckp/error.hpp"
#include "ckp/evolution.hpp"

namespace ckp {

std::string_view to_string(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::Exp: return "exp";
    case PotentialKind::LC: return "lc";
    case PotentialKind::Combined: return "combined";
    case PotentialKind::Reliability: return "reliability";
  }
  return "?";
}

PotentialKind parse_potential(std::string_view text) {
  if (text == "exp") return PotentialKind::Exp;
  if (text == "lc") return PotentialKind::LC;
  if (text == "combined") return PotentialKind::Combined;
  if (text == "reliability") return PotentialKind::Reliability;
  throw ConfigError("unknown potential '" + std::string(text) + "' (exp | lc | combined | reliability)");
}

namespace {

// sum_v weight(v) * 2^depth(v) by Horner over depth levels.
template <typename WeightFn>
mpz_class exponential_sum(const std::vector<NodeId>& members, const std::vector<std::uint32_t>& depth,
                          WeightFn weight) {
  std::vector<std::uint64_t> per_level;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (depth[i] >= per_level.size()) per_level.resize(depth[i] + 1, 0);
    per_level[depth[i]] += weight(members[i]);
  }
  mpz_class acc = 0;
  for (auto it = per_level.rbegin(); it != per_level.rend(); ++it) {
    acc <<= 1;
    acc += static_cast<unsigned long>(*it);
  }
  return acc;
}

}  // namespace

mpz_class block_phi_exp(const KnowledgeState& state, const Block& block) {
  return exponential_sum(block.members, block.depth,
                         [&](NodeId v) { return std::uint64_t{1} + state.node(v).deg_pt; });
}

mpz_class phi_exp(const KnowledgeState& state) {
  mpz_class total = 0;
  for (const Block& b : blocks(state)) total += block_phi_exp(state, b);
  return total;
}

mpq_class block_phi_lc(const Block& block) {
  if (block.size() == 1) return mpq_class(1);
  std::map<std::uint32_t, unsigned long> leaves_by_cf;
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (block.is_leaf[i]) ++leaves_by_cf[block.cf_children[i]];
  }
  mpq_class value(1);
  for (const auto& [cf, count] : leaves_by_cf) value += mpq_class(count, cf + 1UL);
  value.canonicalize();
  return value;
}

mpq_class phi_lc(const KnowledgeState& state) {
  mpq_class total(0);
  for (const Block& b : blocks(state)) total += block_phi_lc(b);
  return total;
}

mpz_class component_phi_exp(const KnowledgeState& state, const PTComponent& component) {
  return exponential_sum(component.members, component.depth,
                         [&](NodeId v) { return std::uint64_t{1} + state.node(v).deg_pt; });
}

mpz_class phi_exp_adapted(const KnowledgeState& state, const PTComponent& component) {
  return mpz_class(static_cast<unsigned long>(component.size())) * component_phi_exp(state, component);
}

mpq_class combined_scale(std::uint32_t k) {
  mpz_class denom = 5 * mpz_class(k + 1UL) * mpz_class(k + 1UL);
  denom <<= k;
  return mpq_class(mpz_class(1), denom);
}

mpq_class phi_combined(const KnowledgeState& state, CheckDepth k) {
  if (!k.is_bounded()) throw Error("combined potential requires a bounded check depth");
  mpz_class large = 0;
  for (const PTComponent& c : pt_components(state)) {
    if (c.size() > k.value()) large += phi_exp_adapted(state, c);
  }
  mpq_class out = phi_lc(state) - combined_scale(k.value()) * mpq_class(large);
  out.canonicalize();
  return out;
}

mpq_class reliability_coefficient(const Probability& epsilon, const Probability& p) {
  if (epsilon.is_one()) throw Error("reliability coefficient undefined for epsilon = 1");
  mpq_class c = epsilon.exact() * (1 - p.exact()) / (1 - epsilon.exact());
  c.canonicalize();
  return c;
}

mpq_class phi_reliability(const KnowledgeState& state, const Probability& epsilon, const Probability& p) {
  const mpq_class coef = reliability_coefficient(epsilon, p);
  const auto truth = true_flags(state);
  unsigned long true_pt = 0;
  for (const NodeRecord& rec : state.nodes()) {
    if (truth[rec.id]) ++true_pt;  // True implies CT, hence PT
  }
  mpq_class out = coef * true_pt - mpq_class(phi_exp(state));
  out.canonicalize();
  return out;
}

mpq_class evaluate(const KnowledgeState& state, PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Exp: return mpq_class(phi_exp(state));
    case PotentialKind::LC: return phi_lc(state);
    case PotentialKind::Combined: return phi_combined(state, state.params().k);
    case PotentialKind::Reliability:
      return phi_reliability(state, state.params().epsilon, state.params().p);
  }
  throw Error("unknown potential kind");
}

PotentialReading read_potentials(const KnowledgeState& state) {
  PotentialReading r;
  r.t = state.clock();
  const auto bs = blocks(state);
  for (const Block& b : bs) {
    r.phi_exp += block_phi_exp(state, b);
    r.phi_lc += block_phi_lc(b);
  }
  mpz_class large = 0;
  const auto& k = state.params().k;
  for (const PTComponent& c : pt_components(state)) {
    r.phi_exp_adapted.push_back(phi_exp_adapted(state, c));
    if (k.is_bounded() && c.size() > k.value()) large += r.phi_exp_adapted.back();
  }
  if (k.is_bounded()) {
    r.phi_combined = r.phi_lc - combined_scale(k.value()) * mpq_class(large);
    r.phi_combined->canonicalize();
  }
  if (!state.params().epsilon.is_one()) {
    r.phi_reliability = phi_reliability(state, state.params().epsilon, state.params().p);
  }
  return r;
}

ApproxValue phi_exp_approx(const KnowledgeState& state) {
  ApproxValue out;
  for (const Block& b : blocks(state)) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double term = std::ldexp(1.0 + state.node(b.members[i]).deg_pt, static_cast<int>(b.depth[i]));
      out.value += term;
    }
  }
  out.overflow = !std::isfinite(out.value);
  return out;
}

// ---- LocalDelta ----

LocalDelta::LocalDelta(const KnowledgeState& state, PotentialKind kind)
    : scratch_(state),
      kind_(kind),
      block_of_(state.size(), BlockTracker::kNoBlock),
      block_index_(state.size(), 0),
      blocks_(blocks(state)),
      truth_(true_flags(state)) {
  if (kind == PotentialKind::Combined) {
    if (!state.params().k.is_bounded()) throw Error("combined potential requires a bounded check depth");
    k_ = state.params().k.value();
    // Components and blocks coincide only without interior CF nodes.
    for (const NodeRecord& rec : state.nodes()) {
      if (rec.label == Label::CF && rec.parent && is_pt(state.label(*rec.parent)) && !truth_[*rec.parent]) {
        throw Error("combined potential deltas require PT components to coincide with blocks");
      }
    }
    if (!state.params().epsilon.is_zero()) {
      throw Error("combined potential deltas require epsilon = 0");
    }
  }
  if (kind == PotentialKind::Reliability) {
    coefficient_ = reliability_coefficient(state.params().epsilon, state.params().p);
  }
  block_values_.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    for (NodeId v : blocks_[i].members) block_of_[v] = blocks_[i].root;
    block_index_[blocks_[i].root] = i;
    block_values_.push_back(unit_value(blocks_[i]));
  }
}

mpq_class LocalDelta::unit_value(const Block& block) const {
  switch (kind_) {
    case PotentialKind::Exp:
    case PotentialKind::Reliability:
      return mpq_class(block_phi_exp(scratch_, block));
    case PotentialKind::LC:
      return block_phi_lc(block);
    case PotentialKind::Combined: {
      mpq_class v = block_phi_lc(block);
      if (block.size() > *k_) {
        const mpz_class adapted = mpz_class(static_cast<unsigned long>(block.size())) *
                                  exponential_sum(block.members, block.depth, [&](NodeId x) {
                                    return std::uint64_t{1} + scratch_.node(x).deg_pt;
                                  });
        v -= combined_scale(*k_) * mpq_class(adapted);
      }
      return v;
    }
  }
  throw Error("unknown potential kind");
}

mpq_class LocalDelta::delta(NodeId parent, Label label, bool checked) {
  const UndoRecord record = apply_choice(scratch_, parent, label, checked);
  // Affected blocks: the parent's, and the block holding the parent of the
  // topmost marked node (it loses a PT child when a CF block root is marked).
  std::vector<NodeId> homes{block_of_[parent]};
  if (!record.relabeled.empty()) {
    const auto& top_parent = scratch_.node(record.relabeled.back().first).parent;
    if (top_parent && *top_parent < block_of_.size()) homes.push_back(block_of_[*top_parent]);
  }
  std::vector<NodeId> region{record.new_node};
  mpq_class before(0);
  for (std::size_t i = 0; i < homes.size(); ++i) {
    const NodeId home = homes[i];
    if (home == BlockTracker::kNoBlock || (i == 1 && home == homes[0])) continue;
    const std::size_t idx = block_index_[home];
    region.insert(region.end(), blocks_[idx].members.begin(), blocks_[idx].members.end());
    before += block_values_[idx];
  }

  mpq_class after(0);
  for (NodeId v : region) {
    const NodeRecord& rec = scratch_.node(v);
    if (!is_pt(rec.label)) continue;
    const bool minimal = rec.label == Label::CF || (rec.parent && scratch_.label(*rec.parent) == Label::PF);
    if (minimal) after += unit_value(block_at(scratch_, v));
  }
  mpq_class out = after - before;
  if (kind_ == PotentialKind::Reliability) {
    // Marked nodes are always False, so only the new node can change |T|.
    const bool new_true = scratch_.label(record.new_node) == Label::CT && truth_[parent];
    out = (new_true ? coefficient_ : mpq_class(0)) - out;
  }
  undo(scratch_, record);
  out.canonicalize();
  return out;
}

}  // namespace ckp
