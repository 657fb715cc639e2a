#pragma once

#include <cstdint>
#include <vector>

#include "ckp/evolution.hpp"
#include "ckp/state.hpp"

namespace ckp {

/// Per-node True flag: every node on the root path (inclusive) is CT.
std::vector<bool> true_flags(const KnowledgeState& state);

/// A maximal connected set of False nodes with observable PT.
struct PTComponent {
  NodeId root = 0;                   // oldest member
  std::vector<NodeId> members;       // sorted by id
  std::vector<std::uint32_t> depth;  // parallel to members, edges from root
  std::vector<NodeId> leaves;        // members without a child in the component

  std::size_t size() const noexcept { return members.size(); }
};

/// A minimal False node together with everything reachable from it through
/// CT-labeled PT children.  Blocks partition the False PT nodes.
struct Block {
  NodeId root = 0;
  std::vector<NodeId> members;        // root first; id order from blocks(), preorder from block_at()
  std::vector<std::uint32_t> depth;   // parallel to members
  std::vector<std::uint32_t> cf_children;  // parallel: CF-labeled PT children
  std::vector<bool> is_leaf;          // parallel: no child inside the block

  std::size_t size() const noexcept { return members.size(); }
};

std::vector<PTComponent> pt_components(const KnowledgeState& state);

/// PT nodes that are CF, or whose parent is PF; sorted by id.
std::vector<NodeId> minimal_false_nodes(const KnowledgeState& state);

/// Block grown from a minimal False node.
Block block_at(const KnowledgeState& state, NodeId root);

/// One block per minimal False node, in root-id order.
std::vector<Block> blocks(const KnowledgeState& state);

/// Number of PT nodes in the subtree rooted at u (u included).
std::uint64_t subtree_pt_count(const KnowledgeState& state, NodeId u);

/// Incrementally maintained block membership (block root per node, or
/// kNoBlock for True and PF nodes).  Used where block identity must be
/// followed step by step; must agree with blocks() recomputed from scratch.
class BlockTracker {
 public:
  static constexpr NodeId kNoBlock = static_cast<NodeId>(-1);

  explicit BlockTracker(const KnowledgeState& state);

  /// Updates membership after `outcome` has been applied to `state`.
  void observe(const KnowledgeState& state, const StepOutcome& outcome);

  NodeId block_of(NodeId v) const { return block_of_[v]; }
  const std::vector<NodeId>& assignment() const noexcept { return block_of_; }

 private:
  void reassign_from(const KnowledgeState& state, NodeId new_root);

  std::vector<NodeId> block_of_;
};

/// Incrementally maintained PT-component sizes.  A step grows the parent's
/// component by one and a check splits at most one component, so the
/// largest component size ever reached can be followed exactly at O(size)
/// cost per split.
class ComponentTracker {
 public:
  static constexpr std::uint32_t kNone = static_cast<std::uint32_t>(-1);

  explicit ComponentTracker(const KnowledgeState& state);

  /// Updates membership after `outcome` has been applied to `state`.
  void observe(const KnowledgeState& state, const StepOutcome& outcome);

  /// Opaque component label of v, or kNone for True and PF nodes.
  std::uint32_t component_of(NodeId v) const { return comp_of_[v]; }
  std::uint64_t size_of(NodeId v) const { return comp_of_[v] == kNone ? 0 : sizes_[comp_of_[v]]; }
  /// max over t' <= now of the largest component size at t'.
  std::uint64_t running_max() const noexcept { return running_max_; }

 private:
  std::uint32_t fresh(std::uint64_t size);

  std::vector<std::uint32_t> comp_of_;
  std::vector<std::uint64_t> sizes_;  // by label; stale labels keep 0
  std::uint64_t running_max_ = 0;
};

}  // namespace ckp
