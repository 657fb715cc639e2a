#include "ckp/state.hpp"

#include <bit>
#include <charconv>

#include "ckp/error.hpp"

namespace ckp {

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::CT: return "CT";
    case Label::CF: return "CF";
    case Label::PF: return "PF";
  }
  return "?";
}

std::string_view to_string(Observable obs) noexcept { return obs == Observable::PT ? "PT" : "PF"; }

// ---- WeightIndex ----

void WeightIndex::append(std::int64_t weight) {
  const std::size_t n = values_.size() + 1;  // 1-based position of the new entry
  const std::size_t low = n & (~n + 1);
  // tree[n] covers (n - low, n]
  tree_.push_back(weight + prefix_sum(n - 1) - prefix_sum(n - low));
  values_.push_back(weight);
  total_ += weight;
}

void WeightIndex::add(std::size_t index, std::int64_t delta) {
  values_[index] += delta;
  total_ += delta;
  for (std::size_t i = index + 1; i <= tree_.size(); i += i & (~i + 1)) tree_[i - 1] += delta;
}

void WeightIndex::pop_back() {
  if (values_.empty() || values_.back() != 0) {
    throw InvariantError("WeightIndex::pop_back on a non-zero entry");
  }
  // Entries below n do not depend on the array length.
  tree_.pop_back();
  values_.pop_back();
}

std::int64_t WeightIndex::prefix_sum(std::size_t count) const {
  std::int64_t sum = 0;
  for (std::size_t i = count; i > 0; i -= i & (~i + 1)) sum += tree_[i - 1];
  return sum;
}

std::size_t WeightIndex::find(std::int64_t target) const {
  std::size_t pos = 0;
  std::int64_t rem = target;
  for (std::size_t step = std::bit_floor(tree_.size()); step > 0; step >>= 1) {
    if (pos + step <= tree_.size() && tree_[pos + step - 1] <= rem) {
      pos += step;
      rem -= tree_[pos - 1];
    }
  }
  return pos;
}

// ---- init kinds ----

InitKind parse_init(std::string_view text) {
  if (text == "simple") return SimpleRootCF{};
  if (text == "general") return GeneralRootCT{};
  if (text.starts_with("univalent")) {
    std::uint32_t length = 3;
    if (text.size() > 9) {
      if (text[9] != ':') throw ConfigError("expected univalent:N, got '" + std::string(text) + "'");
      const auto digits = text.substr(10);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), length);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        throw ConfigError("bad univalent chain length in '" + std::string(text) + "'");
      }
    }
    return UnivalentInit{length};
  }
  throw ConfigError("unknown init '" + std::string(text) + "' (simple | general | univalent:N)");
}

std::string init_name(const InitKind& init) {
  struct Visitor {
    std::string operator()(const SimpleRootCF&) const { return "simple"; }
    std::string operator()(const GeneralRootCT&) const { return "general"; }
    std::string operator()(const UnivalentInit& u) const {
      return "univalent:" + std::to_string(u.chain_length);
    }
    std::string operator()(const ExplicitTree& t) const {
      return "explicit:" + std::to_string(t.nodes.size());
    }
  };
  return std::visit(Visitor{}, init);
}

// ---- KnowledgeState ----

KnowledgeState::KnowledgeState(ModelParams params, const InitKind& init) : params_(std::move(params)) {
  struct Visitor {
    ExplicitTree operator()(const SimpleRootCF&) const { return {{NodeSpec{std::nullopt, Label::CF}}}; }
    ExplicitTree operator()(const GeneralRootCT&) const { return {{NodeSpec{std::nullopt, Label::CT}}}; }
    ExplicitTree operator()(const UnivalentInit& u) const {
      // The root and its single child must both have exactly one PT child.
      if (u.chain_length < 3) {
        throw ConfigError("univalent initialization needs a chain of at least 3 nodes");
      }
      ExplicitTree tree;
      tree.nodes.push_back({std::nullopt, Label::PF});
      for (NodeId i = 1; i < u.chain_length; ++i) tree.nodes.push_back({i - 1, Label::CT});
      return tree;
    }
    ExplicitTree operator()(const ExplicitTree& t) const { return t; }
  };
  build_from(std::visit(Visitor{}, init));
}

void KnowledgeState::build_from(const ExplicitTree& tree) {
  if (tree.nodes.empty()) throw InvariantError("explicit tree: no nodes");
  initial_size_ = tree.nodes.size();
  nodes_.reserve(initial_size_);
  for (NodeId id = 0; id < tree.nodes.size(); ++id) {
    const NodeSpec& spec = tree.nodes[id];
    NodeRecord rec;
    rec.id = id;
    rec.label = spec.label;
    rec.birth = static_cast<std::int64_t>(id) - static_cast<std::int64_t>(initial_size_ - 1);
    if (id == 0) {
      if (spec.parent) throw InvariantError("explicit tree: node 0 must be the root (no parent)");
    } else {
      if (!spec.parent) {
        throw InvariantError("explicit tree: node " + std::to_string(id) + " has no parent (second root)");
      }
      const NodeId parent = *spec.parent;
      if (parent >= tree.nodes.size()) {
        throw InvariantError("explicit tree: dangling parent " + std::to_string(parent) + " of node " +
                             std::to_string(id));
      }
      if (parent >= id) {
        throw InvariantError("explicit tree: cycle or birth-order violation at node " + std::to_string(id) +
                             " (parent " + std::to_string(parent) + " is not older)");
      }
      rec.parent = parent;
    }
    nodes_.push_back(std::move(rec));
  }
  for (const NodeRecord& rec : nodes_) {
    if (!rec.parent) continue;
    NodeRecord& parent = nodes_[*rec.parent];
    parent.children.push_back(rec.id);
    if (is_pt(rec.label)) ++parent.deg_pt;
    if (rec.label == Label::CF) ++parent.deg_cf;
  }
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const NodeSpec& spec = tree.nodes[id];
    if ((spec.deg_pt && *spec.deg_pt != nodes_[id].deg_pt) ||
        (spec.deg_cf && *spec.deg_cf != nodes_[id].deg_cf)) {
      throw InvariantError("explicit tree: degree-cache mismatch at node " + std::to_string(id));
    }
    weights_.append(expected_weight(nodes_[id]));
  }
}

NodeId KnowledgeState::sample_parent(RandomStream& rng) const {
  const std::int64_t total = weights_.total();
  if (total <= 0) throw ExtinctError();
  const auto target = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
  return static_cast<NodeId>(weights_.find(target));
}

void KnowledgeState::refresh_weight(NodeId id) {
  const std::int64_t want = expected_weight(nodes_[id]);
  const std::int64_t have = weights_.value(id);
  if (want < 0) throw InvariantError("negative weight at node " + std::to_string(id));
  if (want != have) weights_.add(id, want - have);
}

NodeId KnowledgeState::attach_child(NodeId parent, Label label) {
  if (parent >= nodes_.size()) throw InvariantError("attach_child: no such parent");
  if (!is_pt(nodes_[parent].label)) throw InvariantError("attach_child: parent is PF");
  if (label == Label::PF) throw InvariantError("attach_child: new nodes are created PT");
  const auto id = static_cast<NodeId>(nodes_.size());
  NodeRecord rec;
  rec.id = id;
  rec.parent = parent;
  rec.label = label;
  rec.birth = static_cast<std::int64_t>(id) - static_cast<std::int64_t>(initial_size_ - 1);
  nodes_.push_back(std::move(rec));
  weights_.append(1);
  NodeRecord& p = nodes_[parent];
  p.children.push_back(id);
  ++p.deg_pt;
  if (label == Label::CF) ++p.deg_cf;
  refresh_weight(parent);
  return id;
}

void KnowledgeState::relabel(NodeId id, Label label) {
  NodeRecord& rec = nodes_[id];
  const Label old = rec.label;
  if (old == label) return;
  rec.label = label;
  if (rec.parent) {
    NodeRecord& parent = nodes_[*rec.parent];
    parent.deg_pt = parent.deg_pt - (is_pt(old) ? 1 : 0) + (is_pt(label) ? 1 : 0);
    parent.deg_cf = parent.deg_cf - (old == Label::CF ? 1 : 0) + (label == Label::CF ? 1 : 0);
    refresh_weight(*rec.parent);
  }
  refresh_weight(id);
}

bool KnowledgeState::mark_pf(NodeId id) {
  if (nodes_[id].label == Label::PF) return false;
  relabel(id, Label::PF);
  return true;
}

void KnowledgeState::remove_last_node() {
  if (nodes_.size() <= initial_size_) throw InvariantError("remove_last_node: no inserted node left");
  const NodeId id = static_cast<NodeId>(nodes_.size() - 1);
  if (!nodes_[id].children.empty()) throw InvariantError("remove_last_node: node has children");
  relabel(id, Label::PF);
  const NodeId parent = *nodes_[id].parent;
  nodes_[parent].children.pop_back();
  weights_.pop_back();
  nodes_.pop_back();
}

void KnowledgeState::audit() const {
  std::int64_t total = 0;
  for (const NodeRecord& rec : nodes_) {
    const std::string at = " at node " + std::to_string(rec.id);
    std::uint32_t pt = 0;
    std::uint32_t cf = 0;
    for (NodeId child : rec.children) {
      const NodeRecord& c = nodes_[child];
      if (!c.parent || *c.parent != rec.id) throw InvariantError("parent/children mismatch" + at);
      if (c.birth <= rec.birth) throw InvariantError("child born before parent" + at);
      if (child <= rec.id) throw InvariantError("child id not larger than parent id" + at);
      if (is_pt(c.label)) ++pt;
      if (c.label == Label::CF) ++cf;
    }
    if (pt != rec.deg_pt) throw InvariantError("deg_pt cache mismatch" + at);
    if (cf != rec.deg_cf) throw InvariantError("deg_cf cache mismatch" + at);
    const std::int64_t want = expected_weight(rec);
    if (weights_.value(rec.id) != want) throw InvariantError("weight cache mismatch" + at);
    if (weights_.prefix_sum(rec.id + 1) - weights_.prefix_sum(rec.id) != want) {
      throw InvariantError("prefix-sum index mismatch" + at);
    }
    total += want;
  }
  if (total != weights_.total()) throw InvariantError("total weight mismatch");
}

std::string KnowledgeState::digest() const {
  std::string out;
  out.reserve(nodes_.size() * 6);
  for (const NodeRecord& rec : nodes_) {
    if (rec.id != 0) out.push_back(',');
    if (rec.parent) {
      out += std::to_string(*rec.parent);
    } else {
      out.push_back('-');
    }
    out.push_back('.');
    out.push_back(rec.label == Label::CT ? 'T' : rec.label == Label::CF ? 'F' : 'P');
  }
  return out;
}

}  // namespace ckp
