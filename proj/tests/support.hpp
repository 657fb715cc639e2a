#pragma once

#include <initializer_list>
#include <optional>
#include <utility>

#include "ckp/state.hpp"

namespace ckp::testing {

inline Probability prob(const char* text) { return Probability::parse(text); }

inline ModelParams simple_params(const char* p, std::uint32_t k) {
  return ModelParams::simple(prob(p), CheckDepth::bounded(k));
}

inline ModelParams general_params(const char* eps, const char* p, std::uint32_t k) {
  return ModelParams{prob(eps), prob(p), CheckDepth::bounded(k)};
}

/// Explicit tree from (parent, label) pairs in birth order; parent -1 marks the root.
inline KnowledgeState tree(ModelParams params, std::initializer_list<std::pair<int, Label>> spec) {
  ExplicitTree t;
  for (const auto& [parent, label] : spec) {
    NodeSpec n;
    if (parent >= 0) n.parent = static_cast<NodeId>(parent);
    n.label = label;
    t.nodes.push_back(n);
  }
  return KnowledgeState(std::move(params), t);
}

constexpr Label CT = Label::CT;
constexpr Label CF = Label::CF;
constexpr Label PF = Label::PF;

}  // namespace ckp::testing
