#include "ckp/decomposition.hpp"

#include <algorithm>

namespace ckp {

std::vector<bool> true_flags(const KnowledgeState& state) {
  std::vector<bool> flags(state.size(), false);
  for (const NodeRecord& rec : state.nodes()) {
    flags[rec.id] = rec.label == Label::CT && (!rec.parent || flags[*rec.parent]);
  }
  return flags;
}

std::vector<PTComponent> pt_components(const KnowledgeState& state) {
  const auto truth = true_flags(state);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp_of(state.size(), kNone);
  std::vector<std::uint32_t> depth_of(state.size(), 0);
  std::vector<PTComponent> comps;
  // Parents precede children in id order, so one pass suffices.
  for (const NodeRecord& rec : state.nodes()) {
    if (!is_pt(rec.label) || truth[rec.id]) continue;
    std::size_t c = kNone;
    if (rec.parent && comp_of[*rec.parent] != kNone) {
      c = comp_of[*rec.parent];
      depth_of[rec.id] = depth_of[*rec.parent] + 1;
    } else {
      c = comps.size();
      comps.push_back(PTComponent{rec.id, {}, {}, {}});
    }
    comp_of[rec.id] = c;
    comps[c].members.push_back(rec.id);
    comps[c].depth.push_back(depth_of[rec.id]);
    if (rec.deg_pt == 0) comps[c].leaves.push_back(rec.id);
  }
  return comps;
}

std::vector<NodeId> minimal_false_nodes(const KnowledgeState& state) {
  std::vector<NodeId> out;
  for (const NodeRecord& rec : state.nodes()) {
    if (!is_pt(rec.label)) continue;
    if (rec.label == Label::CF || (rec.parent && state.label(*rec.parent) == Label::PF)) {
      out.push_back(rec.id);
    }
  }
  return out;
}

namespace {

void add_member(Block& block, const NodeRecord& rec, std::uint32_t depth) {
  block.members.push_back(rec.id);
  block.depth.push_back(depth);
  block.cf_children.push_back(rec.deg_cf);
  // CT-labeled PT children stay in the block; CF children root their own.
  block.is_leaf.push_back(rec.deg_pt == rec.deg_cf);
}

}  // namespace

Block block_at(const KnowledgeState& state, NodeId root) {
  Block block;
  block.root = root;
  std::vector<std::pair<NodeId, std::uint32_t>> stack{{root, 0}};
  while (!stack.empty()) {
    const auto [v, d] = stack.back();
    stack.pop_back();
    const NodeRecord& rec = state.node(v);
    add_member(block, rec, d);
    for (auto it = rec.children.rbegin(); it != rec.children.rend(); ++it) {
      if (state.label(*it) == Label::CT) stack.emplace_back(*it, d + 1);
    }
  }
  return block;
}

std::vector<Block> blocks(const KnowledgeState& state) {
  const auto truth = true_flags(state);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> block_of(state.size(), kNone);
  std::vector<std::uint32_t> depth_of(state.size(), 0);
  std::vector<Block> out;
  for (const NodeRecord& rec : state.nodes()) {
    if (!is_pt(rec.label) || truth[rec.id]) continue;
    std::size_t b = kNone;
    const bool minimal = rec.label == Label::CF || (rec.parent && state.label(*rec.parent) == Label::PF);
    if (minimal) {
      b = out.size();
      out.push_back(Block{});
      out.back().root = rec.id;
    } else {
      b = block_of[*rec.parent];
      depth_of[rec.id] = depth_of[*rec.parent] + 1;
    }
    block_of[rec.id] = b;
    add_member(out[b], rec, depth_of[rec.id]);
  }
  return out;
}

std::uint64_t subtree_pt_count(const KnowledgeState& state, NodeId u) {
  std::uint64_t count = 0;
  std::vector<NodeId> stack{u};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    const NodeRecord& rec = state.node(v);
    if (is_pt(rec.label)) ++count;
    stack.insert(stack.end(), rec.children.begin(), rec.children.end());
  }
  return count;
}

// ---- BlockTracker ----

BlockTracker::BlockTracker(const KnowledgeState& state) : block_of_(state.size(), kNoBlock) {
  for (const Block& b : blocks(state)) {
    for (NodeId v : b.members) block_of_[v] = b.root;
  }
}

void BlockTracker::reassign_from(const KnowledgeState& state, NodeId new_root) {
  std::vector<NodeId> stack{new_root};
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    block_of_[v] = new_root;
    for (NodeId c : state.node(v).children) {
      if (state.label(c) == Label::CT) stack.push_back(c);
    }
  }
}

void BlockTracker::observe(const KnowledgeState& state, const StepOutcome& outcome) {
  const NodeId n = outcome.new_node;
  if (block_of_.size() <= n) block_of_.resize(n + 1, kNoBlock);
  const Label label = state.label(n);
  if (label == Label::CF) {
    block_of_[n] = n;
  } else if (label == Label::CT) {
    block_of_[n] = block_of_[outcome.parent];
  } else {
    block_of_[n] = kNoBlock;
  }
  for (NodeId v : outcome.marked_path) block_of_[v] = kNoBlock;
  for (NodeId v : outcome.marked_path) {
    for (NodeId c : state.node(v).children) {
      if (state.label(c) == Label::CT) reassign_from(state, c);
    }
  }
}

}  // namespace ckp

// ---- ComponentTracker ----

namespace ckp {

std::uint32_t ComponentTracker::fresh(std::uint64_t size) {
  sizes_.push_back(size);
  return static_cast<std::uint32_t>(sizes_.size() - 1);
}

ComponentTracker::ComponentTracker(const KnowledgeState& state) : comp_of_(state.size(), kNone) {
  for (const PTComponent& c : pt_components(state)) {
    const std::uint32_t id = fresh(c.size());
    for (NodeId v : c.members) comp_of_[v] = id;
    running_max_ = std::max<std::uint64_t>(running_max_, c.size());
  }
}

void ComponentTracker::observe(const KnowledgeState& state, const StepOutcome& outcome) {
  const NodeId n = outcome.new_node;
  if (comp_of_.size() <= n) comp_of_.resize(n + 1, kNone);
  // Membership before the check; the marked path is removed below.
  if (comp_of_[outcome.parent] != kNone) {
    comp_of_[n] = comp_of_[outcome.parent];
    ++sizes_[comp_of_[n]];
  } else if (outcome.child_label == Label::CF) {
    comp_of_[n] = fresh(1);
  }
  if (outcome.marked_path.empty()) {
    running_max_ = std::max(running_max_, size_of(n));
    return;
  }

  std::vector<std::uint32_t> touched;
  for (NodeId m : outcome.marked_path) {
    const std::uint32_t c = comp_of_[m];
    if (c != kNone && std::find(touched.begin(), touched.end(), c) == touched.end()) touched.push_back(c);
  }
  for (std::uint32_t c : touched) {
    std::vector<NodeId> starts;
    for (NodeId m : outcome.marked_path) {
      if (comp_of_[m] != c) continue;
      for (NodeId child : state.node(m).children) {
        if (comp_of_[child] == c && is_pt(state.label(child))) starts.push_back(child);
      }
      const auto& parent = state.node(m).parent;
      if (parent && comp_of_[*parent] == c && is_pt(state.label(*parent))) starts.push_back(*parent);
    }
    for (NodeId m : outcome.marked_path) {
      if (comp_of_[m] == c) comp_of_[m] = kNone;
    }
    sizes_[c] = 0;
    for (NodeId s : starts) {
      if (comp_of_[s] != c) continue;  // already relabeled from another start
      const std::uint32_t id = fresh(0);
      std::vector<NodeId> stack{s};
      comp_of_[s] = id;
      while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        ++sizes_[id];
        for (NodeId child : state.node(v).children) {
          if (comp_of_[child] == c) {
            comp_of_[child] = id;
            stack.push_back(child);
          }
        }
        const auto& parent = state.node(v).parent;
        if (parent && comp_of_[*parent] == c) {
          comp_of_[*parent] = id;
          stack.push_back(*parent);
        }
      }
    }
  }
  running_max_ = std::max(running_max_, size_of(n));
}

}  // namespace ckp
