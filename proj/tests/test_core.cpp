#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "ckp/error.hpp"
#include "ckp/evolution.hpp"
#include "ckp/rng.hpp"
#include "ckp/state.hpp"
#include "support.hpp"

using namespace ckp;
using namespace ckp::testing;

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, ReplaysAndSplits) {
  RandomStream a(42, 3), b(42, 3), c(42, 4);
  int differ = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differ += x != c.next_u64();
  }
  EXPECT_GT(differ, 95);
  EXPECT_EQ(a.draws(), 100u);
}

TEST(RandomStream, BelowIsUniform) {
  RandomStream rng(1);
  std::array<int, 7> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4 * std::sqrt(n / 7.0));
}

TEST(RandomStream, DegenerateCoins) {
  RandomStream rng(9);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_FALSE(rng.bernoulli(0.0));
    EXPECT_TRUE(rng.bernoulli(1.0));
  }
}

TEST(Probability, ParsesExactly) {
  EXPECT_EQ(prob("0.25").exact(), mpq_class(1, 4));
  EXPECT_EQ(prob("1/4").exact(), mpq_class(1, 4));
  EXPECT_EQ(prob("6/7").exact(), mpq_class(6, 7));
  EXPECT_EQ(prob("1e-3").exact(), mpq_class(1, 1000));
  EXPECT_EQ(prob("2.5e-1").exact(), mpq_class(1, 4));
  EXPECT_EQ(prob("1").exact(), mpq_class(1));
  EXPECT_EQ(prob("0").exact(), mpq_class(0));
  EXPECT_EQ(prob("0.857143").exact(), mpq_class(857143, 1000000));
  EXPECT_DOUBLE_EQ(prob("0.1").value(), 0.1);
  EXPECT_THROW(prob("1.5"), ConfigError);
  EXPECT_THROW(prob("-0.1"), ConfigError);
  EXPECT_THROW(prob("abc"), ConfigError);
  EXPECT_THROW(prob("3/2"), ConfigError);
  EXPECT_THROW(prob("1/0"), ConfigError);
}

TEST(CheckDepth, Parses) {
  EXPECT_FALSE(CheckDepth::parse("inf").is_bounded());
  EXPECT_EQ(CheckDepth::parse("4").value(), 4u);
  EXPECT_THROW(CheckDepth::parse("0"), ConfigError);
  EXPECT_THROW(CheckDepth::parse("x"), ConfigError);
  EXPECT_THROW(CheckDepth::unbounded().value(), Error);
}

TEST(RegimeMargins, KnownValues) {
  const ModelParams reliable{Probability::parse("0.05"), Probability::parse("0.95"), CheckDepth::bounded(10)};
  EXPECT_EQ(elimination_margin(reliable), mpq_class(-243, 800));
  EXPECT_EQ(survival_margin({Probability::parse("0.3"), Probability::parse("0.1"), CheckDepth::bounded(3)}),
            mpq_class(6, 25));
  // Against a floating-point evaluation of the same formulas.
  for (const char* e : {"0", "1/7", "1/2", "1"}) {
    for (const char* p : {"0", "1/10", "6/7", "1"}) {
      for (std::uint32_t k : {1u, 4u, 40u}) {
        const ModelParams m{Probability::parse(e), Probability::parse(p), CheckDepth::bounded(k)};
        const double ev = m.epsilon.value(), pv = m.p.value();
        const double lhs = (1 - ev) * std::max(-(2.0 * k - 1) * pv / 2 + 3, -pv / 2 + 3 * (1 - pv)) + 2 * ev * (1 - pv);
        EXPECT_NEAR(elimination_margin(m).get_d(), lhs, 1e-12);
        EXPECT_NEAR(survival_margin(m).get_d(), (1 - pv) / 2 - 3 * (1 - ev) * pv, 1e-12);
      }
    }
  }
  const ModelParams deep{Probability::parse("1/10"), Probability::parse("1/2"), CheckDepth::unbounded()};
  EXPECT_EQ(elimination_margin(deep), mpq_class(9, 10) * mpq_class(5, 4) + mpq_class(1, 10));
}

TEST(RegimeMargins, CombinedAdmissibility) {
  EXPECT_TRUE(combined_admissible(Probability::parse("0.16"), CheckDepth::bounded(40)));
  EXPECT_FALSE(combined_admissible(Probability::parse("0.15"), CheckDepth::bounded(40)));
  EXPECT_FALSE(combined_admissible(Probability::parse("0.17"), CheckDepth::bounded(40)));
  EXPECT_TRUE(combined_admissible(Probability::parse("1/6"), CheckDepth::bounded(37)));
  EXPECT_FALSE(combined_admissible(Probability::parse("1/6"), CheckDepth::bounded(36)));
  EXPECT_TRUE(combined_admissible(Probability::parse("12/79"), CheckDepth::bounded(40)));
  EXPECT_FALSE(combined_admissible(Probability::parse("0.16"), CheckDepth::unbounded()));
}

TEST(Observable, MapsLabels) {
  EXPECT_EQ(observable(Label::PF), Observable::PF);
  EXPECT_EQ(observable(Label::CT), Observable::PT);
  EXPECT_EQ(observable(Label::CF), Observable::PT);
}

TEST(NewState, InitialStates) {
  auto s = new_state(simple_params("1/2", 2), SimpleRootCF{});
  EXPECT_EQ(s.size(), 1u);
  EXPECT_EQ(s.label(0), Label::CF);
  EXPECT_EQ(s.total_weight(), 1);

  auto g = new_state(general_params("0", "1/2", 2), GeneralRootCT{});
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.label(0), Label::CT);
  EXPECT_EQ(g.total_weight(), 1);

  auto u = new_state(simple_params("1/2", 2), UnivalentInit{3});
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(u.label(0), Label::PF);
  EXPECT_EQ(u.label(1), Label::CT);
  EXPECT_EQ(u.label(2), Label::CT);
  EXPECT_EQ(u.weight(0), 0);
  EXPECT_EQ(u.weight(1), 2);
  EXPECT_EQ(u.weight(2), 1);
  EXPECT_EQ(u.node(0).deg_pt, 1u);
  EXPECT_EQ(u.node(1).deg_pt, 1u);
  EXPECT_EQ(u.clock(), 0u);
  EXPECT_THROW(new_state(simple_params("1/2", 2), UnivalentInit{2}), ConfigError);
}

TEST(NewState, ParseInit) {
  EXPECT_TRUE(std::holds_alternative<SimpleRootCF>(parse_init("simple")));
  EXPECT_TRUE(std::holds_alternative<GeneralRootCT>(parse_init("general")));
  EXPECT_EQ(std::get<UnivalentInit>(parse_init("univalent:5")).chain_length, 5u);
  EXPECT_EQ(init_name(parse_init("univalent:5")), "univalent:5");
  EXPECT_THROW(parse_init("forest"), ConfigError);
}

namespace {
std::string rejection(const ExplicitTree& t) {
  try {
    KnowledgeState s(simple_params("1/2", 2), t);
  } catch (const InvariantError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST(NewState, ExplicitTreeValidation) {
  ExplicitTree dangling{{NodeSpec{std::nullopt, Label::CF}, NodeSpec{7, Label::CT}}};
  EXPECT_NE(rejection(dangling).find("dangling parent"), std::string::npos);

  ExplicitTree cycle{{NodeSpec{std::nullopt, Label::CF}, NodeSpec{2, Label::CT}, NodeSpec{1, Label::CT}}};
  EXPECT_NE(rejection(cycle).find("cycle"), std::string::npos);

  ExplicitTree mismatch{{NodeSpec{std::nullopt, Label::CF, 2u}, NodeSpec{0, Label::CT}}};
  EXPECT_NE(rejection(mismatch).find("degree-cache mismatch"), std::string::npos);

  ExplicitTree second_root{{NodeSpec{std::nullopt, Label::CF}, NodeSpec{std::nullopt, Label::CT}}};
  EXPECT_NE(rejection(second_root).find("no parent"), std::string::npos);

  EXPECT_NE(rejection(ExplicitTree{}).find("no nodes"), std::string::npos);

  ExplicitTree ok{{NodeSpec{std::nullopt, Label::CF, 2u, 1u}, NodeSpec{0, Label::CT}, NodeSpec{0, Label::CF}}};
  EXPECT_EQ(rejection(ok), "");
}

TEST(SampleParent, MatchesWeights) {
  auto s = tree(simple_params("1/2", 2), {{-1, CF}, {0, CT}, {0, CT}});
  EXPECT_EQ(s.total_weight(), 5);
  RandomStream rng(2024);
  const int n = 1'000'000;
  std::array<int, 3> counts{};
  for (int i = 0; i < n; ++i) ++counts[s.sample_parent(rng)];
  const double probs[] = {0.6, 0.2, 0.2};
  for (int v = 0; v < 3; ++v) {
    const double se = std::sqrt(n * probs[v] * (1 - probs[v]));
    EXPECT_NEAR(counts[v], n * probs[v], 4 * se) << "node " << v;
  }
}

TEST(SampleParent, SingletonAndExtinct) {
  auto s = new_state(general_params("0", "1/2", 2), GeneralRootCT{});
  RandomStream rng(5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(s.sample_parent(rng), 0u);
  auto dead = tree(simple_params("1/2", 2), {{-1, PF}, {0, PF}});
  EXPECT_TRUE(dead.extinct());
  EXPECT_THROW(dead.sample_parent(rng), ExtinctError);
}

TEST(SampleParent, PFNodesNeverDrawn) {
  auto s = tree(simple_params("1/2", 2), {{-1, PF}, {0, CT}, {0, PF}, {1, CT}});
  RandomStream rng(8);
  for (int i = 0; i < 10000; ++i) {
    const NodeId v = s.sample_parent(rng);
    EXPECT_TRUE(v == 1 || v == 3);
  }
}

TEST(Weights, DeltaRules) {
  auto s = new_state(simple_params("1/2", 2), SimpleRootCF{});
  const NodeId a = s.attach_child(0, Label::CT);
  EXPECT_EQ(s.weight(0), 2);
  EXPECT_EQ(s.weight(a), 1);
  EXPECT_EQ(s.total_weight(), 3);
  const NodeId b = s.attach_child(a, Label::CT);
  EXPECT_EQ(s.weight(a), 2);
  s.mark_pf(b);
  EXPECT_EQ(s.weight(b), 0);
  EXPECT_EQ(s.weight(a), 1);
  EXPECT_FALSE(s.mark_pf(b));
  EXPECT_THROW(s.attach_child(b, Label::CT), InvariantError);
  s.audit();
}

TEST(WeightIndex, MatchesLinearScan) {
  RandomStream rng(77);
  WeightIndex idx;
  std::vector<std::int64_t> ref;
  for (int step = 0; step < 3000; ++step) {
    if (ref.empty() || rng.below(3) == 0) {
      const auto w = static_cast<std::int64_t>(rng.below(5));
      idx.append(w);
      ref.push_back(w);
    } else {
      const auto i = rng.below(ref.size());
      const auto nw = static_cast<std::int64_t>(rng.below(6));
      idx.add(i, nw - ref[i]);
      ref[i] = nw;
    }
    std::int64_t total = 0;
    for (auto w : ref) total += w;
    ASSERT_EQ(idx.total(), total);
    if (step % 97 == 0) {
      std::int64_t prefix = 0;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        ASSERT_EQ(idx.prefix_sum(i), prefix);
        for (std::int64_t t = prefix; t < prefix + ref[i]; ++t) ASSERT_EQ(idx.find(t), i);
        prefix += ref[i];
      }
    }
  }
}

// Random trajectories keep every cache consistent, never relabel PF or swap
// CT and CF, and keep ids dense in birth order.
TEST(StateProperties, AuditMonotoneLabelsDenseIds) {
  const ModelParams configs[] = {simple_params("1/2", 2), general_params("1/3", "1/2", 3),
                                 general_params("1/10", "1/5", 1),
                                 ModelParams{prob("1/4"), prob("3/4"), CheckDepth::unbounded()}};
  std::uint64_t seed = 0;
  for (const auto& params : configs) {
    for (int trial = 0; trial < 20; ++trial) {
      const InitKind init = params.epsilon.is_zero() ? InitKind(SimpleRootCF{}) : InitKind(GeneralRootCT{});
      auto s = new_state(params, init);
      RandomStream rng(seed++, trial);
      std::vector<Label> previous;
      for (int t = 0; t < 300 && !s.extinct(); ++t) {
        previous.clear();
        for (const auto& rec : s.nodes()) previous.push_back(rec.label);
        step(s, rng);
        ASSERT_NO_THROW(s.audit());
        for (std::size_t v = 0; v < previous.size(); ++v) {
          const Label now = s.label(static_cast<NodeId>(v));
          if (previous[v] == Label::PF) ASSERT_EQ(now, Label::PF);
          if (now != previous[v]) ASSERT_EQ(now, Label::PF);
        }
        if (!params.epsilon.is_zero()) ASSERT_EQ(s.label(0), Label::CT);
      }
      for (const auto& rec : s.nodes()) {
        for (NodeId c : rec.children) ASSERT_LT(rec.id, c);
      }
    }
  }
}

TEST(Digest, CanonicalEncoding) {
  auto s = tree(simple_params("1/2", 2), {{-1, CF}, {0, CT}, {1, PF}});
  EXPECT_EQ(s.digest(), "-.F,0.T,1.P");
}
