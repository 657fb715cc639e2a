#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ckp/params.hpp"
#include "ckp/rng.hpp"

namespace ckp {

/// Hidden label of a unit of knowledge.
enum class Label : std::uint8_t { CT, CF, PF };

/// What an outside observer sees: PF stays PF, CT and CF both read PT.
enum class Observable : std::uint8_t { PT, PF };

constexpr Observable observable(Label label) noexcept {
  return label == Label::PF ? Observable::PF : Observable::PT;
}

constexpr bool is_pt(Label label) noexcept { return label != Label::PF; }

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Observable obs) noexcept;

using NodeId = std::uint32_t;

struct NodeRecord {
  NodeId id = 0;
  std::optional<NodeId> parent;
  std::vector<NodeId> children;  // in birth order
  Label label = Label::CT;
  std::int64_t birth = 0;
  std::uint32_t deg_pt = 0;  // children with observable PT
  std::uint32_t deg_cf = 0;  // children labeled CF (those are PT by definition)
};

/// Append-only binary indexed tree over non-negative integer weights.
class WeightIndex {
 public:
  void append(std::int64_t weight);
  void add(std::size_t index, std::int64_t delta);
  /// Removes the last entry; its weight must already be zero.
  void pop_back();

  std::int64_t value(std::size_t index) const { return values_[index]; }
  std::int64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return values_.size(); }
  /// Smallest index i with prefix_sum(i) > target; target < total().
  std::size_t find(std::int64_t target) const;
  /// Sum of the first `count` weights.
  std::int64_t prefix_sum(std::size_t count) const;

 private:
  std::vector<std::int64_t> tree_;    // 1-based Fenwick array stored 0-based
  std::vector<std::int64_t> values_;  // raw weights for O(1) reads
  std::int64_t total_ = 0;
};

// ---- initial states ----

struct SimpleRootCF {};
struct GeneralRootCT {};
/// PF root, then a chain of CT nodes; the deepest node is the growth frontier.
struct UnivalentInit {
  std::uint32_t chain_length = 3;
};
struct NodeSpec {
  std::optional<NodeId> parent;
  Label label = Label::CT;
  std::optional<std::uint32_t> deg_pt;  // optional cached claims, validated
  std::optional<std::uint32_t> deg_cf;
};
/// Nodes listed in birth order; node 0 is the root.
struct ExplicitTree {
  std::vector<NodeSpec> nodes;
};

using InitKind = std::variant<SimpleRootCF, GeneralRootCT, UnivalentInit, ExplicitTree>;

/// "simple", "general", "univalent:N".
InitKind parse_init(std::string_view text);
std::string init_name(const InitKind& init);

/// Labeled rooted tree X_t plus the sampling index over PT nodes.
///
/// weight(v) = 1 + deg_pt(v) for PT nodes and 0 for PF nodes; the index is
/// kept consistent by every mutator.  Ids are birth order, dense, never reused.
class KnowledgeState {
 public:
  KnowledgeState(ModelParams params, const InitKind& init);

  const ModelParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t initial_size() const noexcept { return initial_size_; }
  /// Number of insertions performed since the initial state.
  std::uint64_t clock() const noexcept { return nodes_.size() - initial_size_; }

  const NodeRecord& node(NodeId id) const { return nodes_[id]; }
  std::span<const NodeRecord> nodes() const noexcept { return nodes_; }
  Label label(NodeId id) const { return nodes_[id].label; }

  std::int64_t weight(NodeId id) const { return weights_.value(id); }
  std::int64_t total_weight() const noexcept { return weights_.total(); }
  bool extinct() const noexcept { return weights_.total() == 0; }

  /// Draws u with probability weight(u) / total_weight().  Throws ExtinctError.
  NodeId sample_parent(RandomStream& rng) const;

  /// Appends a PT child; returns its id.  The parent must be PT.
  NodeId attach_child(NodeId parent, Label label);
  /// Relabels a PT node PF; returns false when it was already PF.
  bool mark_pf(NodeId id);

  /// Undo support: removes the newest node, which must have no children.
  void remove_last_node();
  /// Undo support: arbitrary relabel with cache maintenance.
  void relabel(NodeId id, Label label);

  /// Recomputes every cached degree and weight from scratch and throws
  /// InvariantError on the first mismatch.
  void audit() const;

  /// Canonical encoding: "parent.label" per node in id order, e.g. "-.F,0.T".
  std::string digest() const;

 private:
  std::int64_t expected_weight(const NodeRecord& rec) const noexcept {
    return is_pt(rec.label) ? 1 + static_cast<std::int64_t>(rec.deg_pt) : 0;
  }
  void refresh_weight(NodeId id);
  void build_from(const ExplicitTree& tree);

  ModelParams params_;
  std::vector<NodeRecord> nodes_;
  WeightIndex weights_;
  std::size_t initial_size_ = 0;
};

inline KnowledgeState new_state(ModelParams params, const InitKind& init) {
  return KnowledgeState(std::move(params), init);
}

}  // namespace ckp
