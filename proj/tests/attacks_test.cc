/*
 * Copyright 2026 The shuffle-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "shuffle_audit/attacks.h"

#include <algorithm>
#include <numeric>

#include "gtest/gtest.h"
#include "shuffle_audit/error.h"

namespace shuffle_audit {
namespace {

constexpr auto kHigher = Direction::kHigherIsSuperior;

// Groups written as F (unprivileged, 0) and M (privileged, 1).
std::vector<uint8_t> Groups(std::string_view pattern) {
  std::vector<uint8_t> g;
  for (char c : pattern) g.push_back(c == 'M' ? 1 : 0);
  return g;
}

SortedView View(const std::vector<double>& y, const std::vector<uint8_t>& g) {
  return PrepareSortedView(y, g, kHigher);
}

// Random distinct scores in random order.
std::vector<double> DistinctScores(size_t n, CounterStream& rng) {
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = static_cast<double>(i + 1) / (n + 1);
  const auto perm = RandomPermutation(n, rng);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = y[perm[i]];
  return out;
}

std::vector<size_t> RanksOf(const std::vector<double>& y) {
  std::vector<size_t> order(y.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return y[a] > y[b]; });
  std::vector<size_t> rank(y.size());
  for (size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
  return rank;
}

// Reference kernels, written from the pseudocode over group strings of the
// sorted view. Output: group-position arrangement (original sorted position
// receiving the k-th best score).
std::vector<size_t> ReferenceDominance(const std::vector<uint8_t>& g) {
  std::vector<size_t> out;
  for (size_t i = 0; i < g.size(); ++i) if (g[i]) out.push_back(i);
  for (size_t i = 0; i < g.size(); ++i) if (!g[i]) out.push_back(i);
  return out;
}

std::vector<size_t> ReferenceBubblePasses(std::vector<uint8_t> g, size_t j_start) {
  std::vector<size_t> ids(g.size());
  std::iota(ids.begin(), ids.end(), size_t{0});
  if (g.size() < 2) return ids;
  for (size_t j = j_start + 1; j-- > 0;) {
    for (size_t i = j; i + 1 < g.size(); ++i) {
      if (!g[i] && g[i + 1]) {
        std::swap(g[i], g[i + 1]);
        std::swap(ids[i], ids[i + 1]);
      }
    }
  }
  return ids;
}

std::vector<double> Arranged(const std::vector<double>& y, const std::vector<uint8_t>& g,
                             const std::vector<size_t>& arrangement) {
  const SortedView v = View(y, g);
  return ApplyArrangement(v, arrangement);
}

// ---------------------------------------------------------------------------

TEST(PrepareSortedViewTest, OrdersSuperiorFirstAndStableOnTies) {
  const std::vector<uint8_t> g = {0, 1};
  auto v = PrepareSortedView(std::vector<double>{0.5, 0.9}, g, kHigher);
  EXPECT_EQ(v.ids, (std::vector<size_t>{1, 0}));
  EXPECT_EQ(v.scores, (std::vector<double>{0.9, 0.5}));
  v = PrepareSortedView(std::vector<double>{0.7, 0.7}, g, kHigher);
  EXPECT_EQ(v.ids, (std::vector<size_t>{0, 1}));
  v = PrepareSortedView(std::vector<double>{0.5, 0.9}, g, Direction::kLowerIsSuperior);
  EXPECT_EQ(v.ids, (std::vector<size_t>{0, 1}));
}

const std::vector<double> kMicroScores = {0.9, 0.7, 0.5, 0.3};

TEST(DominanceTest, HandTracedMicroBatch) {
  const auto out = AttackDominance(View(kMicroScores, Groups("FMFM")));
  EXPECT_EQ(out, (std::vector<double>{0.5, 0.9, 0.3, 0.7}));
}

TEST(DominanceTest, DegenerateBatchesUnchanged) {
  EXPECT_EQ(AttackDominance(View(kMicroScores, Groups("MMMM"))), kMicroScores);
  EXPECT_EQ(AttackDominance(View({0.4}, Groups("F"))), (std::vector<double>{0.4}));
}

TEST(MixingTest, HeadProbOneIsDominance) {
  const auto v = View(kMicroScores, Groups("FMFM"));
  EXPECT_EQ(AttackMixing(v, 1.0, CoinVariant::kLiteral, 3), AttackDominance(v));
  EXPECT_EQ(AttackMixing(v, 1.0, CoinVariant::kBernoulli, 3), AttackDominance(v));
}

TEST(MixingTest, LiteralAllTailsIsIdentity) {
  const auto v = View(kMicroScores, Groups("FMFM"));
  EXPECT_EQ(AttackMixing(v, 0.0, CoinVariant::kLiteral, 3), kMicroScores);
}

TEST(MixingTest, BernoulliAllTailsPromotesUnprivileged) {
  // Tail always hands the next-best score to the unprivileged front.
  const auto v = View(kMicroScores, Groups("MFMF"));
  EXPECT_EQ(AttackMixing(v, 0.0, CoinVariant::kBernoulli, 3),
            (std::vector<double>{0.5, 0.9, 0.3, 0.7}));
}

TEST(MixingTest, DeterministicGivenSeed) {
  CounterStream rng(5);
  const auto y = DistinctScores(50, rng);
  std::vector<uint8_t> g(50);
  for (auto& x : g) x = rng.NextBernoulli(0.5);
  const auto v = View(y, g);
  EXPECT_EQ(AttackMixing(v, 0.6, CoinVariant::kLiteral, 9),
            AttackMixing(v, 0.6, CoinVariant::kLiteral, 9));
}

TEST(SwappingTest, QuantileZeroHandTrace) {
  const auto out = AttackSwapping(View(kMicroScores, Groups("FMFM")), 0.0, false);
  EXPECT_EQ(out, (std::vector<double>{0.7, 0.9, 0.3, 0.5}));
}

TEST(SwappingTest, QuantileOneIsDominance) {
  const auto v = View(kMicroScores, Groups("FMFM"));
  EXPECT_EQ(AttackSwapping(v, 1.0, false), AttackDominance(v));
}

TEST(SwappingTest, LoneTopUnprivilegedSinksToBottom) {
  const std::vector<double> y = {0.9, 0.8, 0.7, 0.6, 0.5};
  const auto out = AttackSwapping(View(y, Groups("FMMMM")), 0.0, false);
  EXPECT_EQ(out[0], 0.5);
}

TEST(SwappingTest, SingleStepMovesEachRowAtMostOnePerPass) {
  const std::vector<double> y = {0.9, 0.8, 0.7, 0.6, 0.5};
  const auto out = AttackSwapping(View(y, Groups("FMMMM")), 0.0, true);
  EXPECT_EQ(out[0], 0.8);
  EXPECT_EQ(out[1], 0.9);
}

TEST(ModifiersTest, RegionLeavesLowerRanksUntouched) {
  CounterStream rng(2);
  const auto y = DistinctScores(1000, rng);
  std::vector<uint8_t> g(1000);
  for (auto& x : g) x = rng.NextBernoulli(0.4);
  const auto v = View(y, g);
  Modifiers m;
  m.region = 0.15;
  const auto out = ApplyAttack(v, AttackSpec::Dominance().WithModifiers(m), 1);
  for (size_t k = 150; k < v.size(); ++k) {
    EXPECT_EQ(out[v.ids[k]], y[v.ids[k]]) << "position " << k;
  }
  bool changed = false;
  for (size_t k = 0; k < 150; ++k) changed |= out[v.ids[k]] != y[v.ids[k]];
  EXPECT_TRUE(changed);
}

TEST(ModifiersTest, IdentityModifiersAndZeroCount) {
  CounterStream rng(4);
  const auto y = DistinctScores(40, rng);
  std::vector<uint8_t> g(40);
  for (auto& x : g) x = rng.NextBernoulli(0.5);
  const auto v = View(y, g);
  for (const AttackSpec& spec :
       {AttackSpec::Dominance(), AttackSpec::Mixing(0.7), AttackSpec::Swapping(0.4)}) {
    Modifiers identity;
    EXPECT_EQ(ApplyAttack(v, spec.WithModifiers(identity), 8), ApplyAttack(v, spec, 8));
    Modifiers none;
    none.max_count = 0;
    EXPECT_EQ(ApplyAttack(v, spec.WithModifiers(none), 8), y) << spec.Label();
  }
}

TEST(ModifiersTest, CountCapLimitsSwaps) {
  const std::vector<double> y = {0.9, 0.8, 0.7, 0.6, 0.5};
  const auto v = View(y, Groups("FMMMM"));
  Modifiers m;
  m.max_count = 2;
  const auto out = ApplyAttack(v, AttackSpec::Swapping(0.0).WithModifiers(m), 0);
  EXPECT_EQ(out[0], 0.7);  // two swaps down
}

TEST(HybridTest, HalvesAreIsolated) {
  const auto v = View(kMicroScores, Groups("FMFM"));
  const auto out = ComposeHybrid(v, AttackSpec::Dominance().step, AttackStep{}, 0);
  EXPECT_EQ(out, (std::vector<double>{0.7, 0.9, 0.5, 0.3}));
  EXPECT_EQ(ComposeHybrid(v, AttackStep{}, AttackStep{}, 0), kMicroScores);
}

TEST(HybridTest, OddSizeGivesExtraRowToTop) {
  const std::vector<double> y = {0.9, 0.8, 0.7, 0.6, 0.5};
  const auto v = View(y, Groups("FFMFM"));
  const auto out = ComposeHybrid(v, AttackSpec::Dominance().step, AttackStep{}, 0);
  EXPECT_EQ(out, (std::vector<double>{0.8, 0.7, 0.9, 0.6, 0.5}));
}

TEST(AttackSpecTest, ValidatesRanges) {
  EXPECT_THROW(AttackSpec::Mixing(1.5).Validate(), InvalidArgument);
  EXPECT_THROW(AttackSpec::Swapping(-0.1).Validate(), InvalidArgument);
  Modifiers m;
  m.region = 0.0;
  EXPECT_THROW(AttackSpec::Dominance().WithModifiers(m).Validate(), InvalidArgument);
  m.region = 1.0;
  m.frequency = 0.0;
  EXPECT_THROW(AttackSpec::Dominance().WithModifiers(m).Validate(), InvalidArgument);
}

TEST(AttackSpecTest, JsonRoundTripAndLabels) {
  Modifiers m;
  m.region = 0.15;
  m.max_count = 7;
  for (const AttackSpec& spec :
       {AttackSpec::None(), AttackSpec::Dominance().WithModifiers(m),
        AttackSpec::Mixing(0.8, CoinVariant::kBernoulli), AttackSpec::Swapping(0.4, true),
        AttackSpec::Hybrid(AttackSpec::Dominance().step, AttackSpec::Mixing(0.8).step)}) {
    const AttackSpec back = AttackSpec::FromJson(spec.ToJson());
    EXPECT_EQ(back.ToJson(), spec.ToJson());
    EXPECT_EQ(back.Label(), spec.Label());
  }
  EXPECT_EQ(AttackSpec::Hybrid(AttackSpec::Dominance().step, AttackSpec::Mixing(0.8).step)
                .Label(),
            "dom+mix");
  EXPECT_EQ(ParseAttackKind("swap"), AttackKind::kSwapping);
}

// ---------------------------------------------------------------------------
// Adversarial scorer

FeatureSchema Schema() {
  return FeatureSchema({{"a", FeatureRole::kScoring, {}}, {"g", FeatureRole::kProtected, {}}},
                       kHigher);
}

TEST(AdversarialScorerTest, ConstantProtectedColumnLeavesScores) {
  Matrix rows(4, 2);
  rows << 0.9, 1, 0.7, 1, 0.5, 1, 0.3, 1;
  const Dataset d(Schema(), rows);
  const AdversarialScorer f(ScoringModel::EqualWeights({"a"}), {"g"}, AttackSpec::Dominance(),
                            0, kHigher);
  EXPECT_EQ(AdversarialScore(f, d), ScoreBatch(f.base(), d));
}

TEST(AdversarialScorerTest, MicroBatchDominance) {
  Matrix rows(4, 2);
  rows << 0.9, 0, 0.7, 1, 0.5, 0, 0.3, 1;
  const Dataset d(Schema(), rows);
  const AdversarialScorer f(ScoringModel::EqualWeights({"a"}), {"g"}, AttackSpec::Dominance(),
                            0, kHigher);
  EXPECT_EQ(AdversarialScore(f, d), (std::vector<double>{0.5, 0.9, 0.3, 0.7}));
}

TEST(AdversarialScorerTest, DeterministicAndSeedSensitive) {
  CounterStream rng(1);
  Matrix rows(60, 2);
  for (int i = 0; i < 60; ++i) {
    rows(i, 0) = rng.NextUniform();
    rows(i, 1) = rng.NextBernoulli(0.5);
  }
  const Dataset d(Schema(), rows);
  const auto model = ScoringModel::EqualWeights({"a"});
  const AdversarialScorer f(model, {"g"}, AttackSpec::Mixing(0.5), 1, kHigher);
  const AdversarialScorer h(model, {"g"}, AttackSpec::Mixing(0.5), 2, kHigher);
  EXPECT_EQ(AdversarialScore(f, d), AdversarialScore(f, d));
  EXPECT_NE(AdversarialScore(f, d), AdversarialScore(h, d));
}

TEST(AdversarialScorerTest, ProtectedFeatureInModelIsRejected) {
  EXPECT_THROW(AdversarialScorer(ScoringModel::EqualWeights({"a", "g"}), {"g"},
                                 AttackSpec::Dominance(), 0, kHigher),
               SchemaError);
}

// ---------------------------------------------------------------------------
// Properties

struct Instance {
  std::vector<double> y;
  std::vector<uint8_t> g;
};

Instance RandomInstance(CounterStream& rng) {
  const size_t n = 2 + rng.NextBelow(60);
  Instance inst{DistinctScores(n, rng), std::vector<uint8_t>(n)};
  const double p = rng.NextUniform();
  for (auto& x : inst.g) x = rng.NextBernoulli(p);
  return inst;
}

AttackSpec RandomSpec(CounterStream& rng) {
  AttackSpec spec;
  switch (rng.NextBelow(4)) {
    case 0: spec = AttackSpec::Dominance(); break;
    case 1:
      spec = AttackSpec::Mixing(rng.NextUniform(),
                                rng.NextBernoulli(0.5) ? CoinVariant::kLiteral
                                                       : CoinVariant::kBernoulli);
      break;
    case 2: spec = AttackSpec::Swapping(rng.NextUniform(), rng.NextBernoulli(0.5)); break;
    default: {
      const auto step = [&] {
        AttackStep s;
        s.kind = static_cast<AttackKind>(rng.NextBelow(4));
        s.head_prob = rng.NextUniform();
        s.quantile = rng.NextUniform();
        return s;
      };
      return AttackSpec::Hybrid(step(), step());
    }
  }
  Modifiers m;
  if (rng.NextBernoulli(0.5)) m.region = 0.05 + 0.95 * rng.NextUniform();
  if (rng.NextBernoulli(0.5)) m.frequency = 0.05 + 0.95 * rng.NextUniform();
  if (rng.NextBernoulli(0.3)) m.max_count = rng.NextBelow(20);
  return spec.WithModifiers(m);
}

TEST(AttackPropertyTest, MultisetPreservedForEveryAttack) {
  CounterStream rng(100);
  for (int t = 0; t < 2000; ++t) {
    const Instance inst = RandomInstance(rng);
    const AttackSpec spec = RandomSpec(rng);
    auto out = ApplyAttack(View(inst.y, inst.g), spec, rng.NextU64());
    auto before = inst.y;
    std::sort(out.begin(), out.end());
    std::sort(before.begin(), before.end());
    ASSERT_EQ(out, before) << spec.Label();
  }
}

TEST(AttackPropertyTest, WithinGroupOrderPreserved) {
  CounterStream rng(101);
  for (int t = 0; t < 1500; ++t) {
    const Instance inst = RandomInstance(rng);
    const AttackSpec spec = RandomSpec(rng);
    const auto out = ApplyAttack(View(inst.y, inst.g), spec, rng.NextU64());
    for (size_t a = 0; a < inst.y.size(); ++a) {
      for (size_t b = 0; b < inst.y.size(); ++b) {
        if (inst.g[a] == inst.g[b] && inst.y[a] > inst.y[b]) {
          ASSERT_GT(out[a], out[b]) << spec.Label();
        }
      }
    }
  }
}

TEST(AttackPropertyTest, MonotoneGroupMovementForDominanceAndSwapping) {
  CounterStream rng(102);
  for (int t = 0; t < 1500; ++t) {
    const Instance inst = RandomInstance(rng);
    const AttackSpec spec = rng.NextBernoulli(0.5)
                                ? AttackSpec::Dominance()
                                : AttackSpec::Swapping(rng.NextUniform(), rng.NextBernoulli(0.5));
    const auto before = RanksOf(inst.y);
    const auto after = RanksOf(ApplyAttack(View(inst.y, inst.g), spec, 0));
    for (size_t i = 0; i < inst.y.size(); ++i) {
      if (inst.g[i]) {
        ASSERT_LE(after[i], before[i]) << spec.Label();
      } else {
        ASSERT_GE(after[i], before[i]) << spec.Label();
      }
    }
  }
}

TEST(AttackPropertyTest, DominanceSeparatesAndIsIdempotent) {
  CounterStream rng(103);
  for (int t = 0; t < 1000; ++t) {
    const Instance inst = RandomInstance(rng);
    const auto once = AttackDominance(View(inst.y, inst.g));
    double min_p = 2.0, max_u = -1.0;
    for (size_t i = 0; i < once.size(); ++i) {
      if (inst.g[i]) min_p = std::min(min_p, once[i]);
      else max_u = std::max(max_u, once[i]);
    }
    ASSERT_GE(min_p, max_u);
    ASSERT_EQ(AttackDominance(View(once, inst.g)), once);
  }
}

TEST(AttackPropertyTest, ExhaustiveSpecialCaseChain) {
  CounterStream rng(104);
  for (size_t n = 1; n <= 8; ++n) {
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::vector<uint8_t> g(n);
      for (size_t i = 0; i < n; ++i) g[i] = (mask >> i) & 1u;
      const auto y = DistinctScores(n, rng);
      const SortedView v = View(y, g);
      const auto dominance = AttackDominance(v);
      const auto ref_dom = Arranged(y, g, ReferenceDominance(v.privileged));
      ASSERT_EQ(dominance, ref_dom);
      ASSERT_EQ(AttackMixing(v, 1.0, CoinVariant::kLiteral, mask), dominance);
      ASSERT_EQ(AttackSwapping(v, 1.0, false), dominance);
      ASSERT_EQ(AttackMixing(v, 0.0, CoinVariant::kLiteral, mask), y);
      ASSERT_EQ(AttackSwapping(v, 0.0, false),
                Arranged(y, g, ReferenceBubblePasses(v.privileged, 0)));
      for (double q : {0.25, 0.5, 0.75}) {
        const size_t j = n >= 2 ? static_cast<size_t>(std::llround(q * (n - 2.0))) : 0;
        ASSERT_EQ(AttackSwapping(v, q, false),
                  Arranged(y, g, ReferenceBubblePasses(v.privileged, j)));
      }
    }
  }
}

}  // namespace
}  // namespace shuffle_audit
