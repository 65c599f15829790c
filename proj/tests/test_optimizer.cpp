#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace vantage;
using testing_support::look_at;
using testing_support::uniform_in;

namespace {

std::vector<CandidateViewpoint> ring_candidates(std::mt19937_64& rng, int n) {
  std::vector<CandidateViewpoint> out;
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
  std::uniform_real_distribution<double> rad(2.0, 7.0);
  for (int i = 0; i < n; ++i) {
    const double a = ang(rng), r = rad(rng);
    CandidateViewpoint c;
    c.id = i;
    c.view = look_at(Vec3(r * std::cos(a), r * std::sin(a), 1.0),
                     uniform_in(rng, Vec3(-0.8, -0.8, 0.0), Vec3(0.8, 0.8, 1.0)),
                     CameraIntrinsics{deg2rad(40), deg2rad(50), 10.0});
    out.push_back(c);
  }
  return out;
}

Individual individual(Chromosome genes, double cov, double dist) {
  Individual i;
  i.genes = std::move(genes);
  i.objectives = {cov, dist};
  return i;
}

}  // namespace

TEST(Evaluate, FullCoverageAndModeDispatch) {
  std::mt19937_64 rng(2);
  const MotionEnvelope env = testing_support::random_envelope(rng, 160, Vec3(-1, -1, 0), Vec3(1, 1, 1));
  std::vector<CandidateViewpoint> c(2);
  c[0].view = look_at(Vec3(-6, 0, 0.5), Vec3(0, 0, 0.5));
  c[1].view = look_at(Vec3(6, 0, 0.5), Vec3(0, 0, 0.5));
  const ObjectiveVector o = evaluate({0, 1}, c, env);
  EXPECT_EQ(o.coverage, 1.0);
  const std::vector<CameraView> views{c[0].view, c[1].view};
  EXPECT_DOUBLE_EQ(o.distance, distance_pick(views, env));

  const auto cands = ring_candidates(rng, 12);
  TargetPointSet t;
  t.per_state = {{Vec3(0, 0, 0.5), Vec3(0.2, 0, 0.5)}, {Vec3(0.3, 0.1, 0.6)}};
  const CombinationEvaluator cached(cands, env);
  const CombinationEvaluator cached_place(cands, env, &t);
  std::uniform_int_distribution<int> pick(0, 11);
  for (int i = 0; i < 100; ++i) {
    Chromosome g{pick(rng), pick(rng)};
    if (g[0] == g[1]) continue;
    std::sort(g.begin(), g.end());
    const std::vector<CameraView> v{cands[g[0]].view, cands[g[1]].view};
    EXPECT_EQ(cached(g).coverage, coverage(v, env));
    EXPECT_NEAR(cached(g).distance, distance_pick(v, env), 1e-12);
    EXPECT_NEAR(cached_place(g).distance, distance_place(v, t), 1e-12);
    EXPECT_EQ(evaluate(g, cands, env, &t).coverage, cached_place(g).coverage);
  }
}

TEST(NondominatedSort, HandExampleAndDegenerateCases) {
  const std::vector<ObjectiveVector> objs{{0.9, 2}, {0.8, 1}, {0.9, 1}};
  const auto fronts = fast_nondominated_sort(objs);
  ASSERT_EQ(fronts.size(), 2u);
  EXPECT_EQ(fronts[0], (std::vector<std::size_t>{2}));
  EXPECT_EQ(std::set<std::size_t>(fronts[1].begin(), fronts[1].end()), (std::set<std::size_t>{0, 1}));

  const std::vector<ObjectiveVector> one{{0.5, 1}};
  EXPECT_EQ(fast_nondominated_sort(one).size(), 1u);
  const std::vector<ObjectiveVector> same(7, {0.5, 1});
  const auto all = fast_nondominated_sort(same);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].size(), 7u);
}

TEST(NondominatedSort, MatchesPeelingOracle) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> grid(0, 12);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ObjectiveVector> objs;
    // Coarse values force plenty of ties.
    for (int i = 0; i < 80; ++i) objs.push_back({grid(rng) / 12.0, grid(rng) * 0.5});
    const auto fronts = fast_nondominated_sort(objs);
    const auto ref = oracle::peel_fronts(objs);
    ASSERT_EQ(fronts.size(), ref.size());
    for (std::size_t f = 0; f < ref.size(); ++f)
      EXPECT_EQ(std::set<std::size_t>(fronts[f].begin(), fronts[f].end()), ref[f]);
  }
}

TEST(Crowding, BoundaryMiddleAndDuplicates) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<ObjectiveVector> two{{0.1, 1}, {0.9, 2}};
  for (double d : crowding_distance(two)) EXPECT_EQ(d, inf);
  const std::vector<ObjectiveVector> line{{0.0, 0.0}, {0.5, 1.0}, {1.0, 2.0}};
  const auto d = crowding_distance(line);
  EXPECT_EQ(d[0], inf);
  EXPECT_EQ(d[2], inf);
  EXPECT_DOUBLE_EQ(d[1], 2.0);
  const std::vector<ObjectiveVector> dup(5, {0.4, 3.0});
  for (double v : crowding_distance(dup)) {
    EXPECT_FALSE(std::isnan(v));
    EXPECT_GE(v, 0.0);
  }
}

TEST(Crowding, MatchesScanOracle) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ObjectiveVector> front;
    for (int i = 0; i < 25; ++i) front.push_back({u(rng), 5.0 * u(rng)});
    const auto got = crowding_distance(front);
    const auto want = oracle::scan_crowding(front);
    for (std::size_t i = 0; i < front.size(); ++i) {
      if (std::isinf(want[i]))
        EXPECT_TRUE(std::isinf(got[i]));
      else
        EXPECT_NEAR(got[i], want[i], 1e-12);
    }
  }
}

TEST(Nsga2, FrontIsSubsetOfExhaustiveFront) {
  std::mt19937_64 rng(5);
  const auto cands = ring_candidates(rng, 20);
  const MotionEnvelope env = testing_support::random_envelope(rng, 200, Vec3(-1, -1, 0), Vec3(1, 1, 1.5));
  const CombinationEvaluator eval(cands, env);
  std::vector<ObjectiveVector> all;
  for (int a = 0; a < 20; ++a)
    for (int b = a + 1; b < 20; ++b) all.push_back(eval({a, b}));
  const auto true_front = oracle::peel_fronts(all)[0];

  Nsga2Params p;
  p.population = 40;
  p.generations = 50;
  p.seed = 3;
  const auto front = nsga2_run(cands.size(), p, eval);
  ASSERT_FALSE(front.empty());
  for (const auto& ind : front) {
    bool dominated = false;
    for (const auto& o : all) dominated = dominated || oracle::pareto_dominates(o, ind.objectives);
    EXPECT_FALSE(dominated) << ind.genes[0] << "," << ind.genes[1];
    EXPECT_EQ(ind.objectives, eval(ind.genes));
  }
  EXPECT_FALSE(true_front.empty());
}

TEST(Nsga2, ForcedPairDeterminismAndShortPool) {
  std::mt19937_64 rng(6);
  const auto cands = ring_candidates(rng, 8);
  const MotionEnvelope env = testing_support::random_envelope(rng, 64, Vec3(-1, -1, 0), Vec3(1, 1, 1));
  const CombinationEvaluator eval(cands, env);
  Nsga2Params p;
  p.population = 20;
  p.generations = 10;
  const auto forced = nsga2_run(2, p, eval);
  ASSERT_EQ(forced.size(), 1u);
  EXPECT_EQ(forced[0].genes, (Chromosome{0, 1}));

  const auto a = nsga2_run(cands.size(), p, eval);
  const auto b = nsga2_run(cands.size(), p, eval);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].genes, b[i].genes);

  try {
    nsga2_run(1, p, eval);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient candidates"), std::string::npos);
  }
}

TEST(Nsga2, ChromosomesStayDistinctAndSorted) {
  std::mt19937_64 rng(7);
  const auto cands = ring_candidates(rng, 6);
  const MotionEnvelope env = testing_support::random_envelope(rng, 64, Vec3(-1, -1, 0), Vec3(1, 1, 1));
  const CombinationEvaluator eval(cands, env);
  Nsga2Params p;
  p.population = 30;
  p.generations = 15;
  p.slots = 3;
  bool checked = false;
  nsga2_run(cands.size(), p, eval, [&](std::size_t, std::span<const Individual> pop) {
    for (const auto& ind : pop) {
      ASSERT_EQ(ind.genes.size(), 3u);
      EXPECT_LT(ind.genes[0], ind.genes[1]);
      EXPECT_LT(ind.genes[1], ind.genes[2]);
      EXPECT_GE(ind.genes[0], 0);
      EXPECT_LT(ind.genes[2], 6);
    }
    checked = true;
  });
  EXPECT_TRUE(checked);
}

TEST(SelectFinal, VisibilityWinsAboveThreshold) {
  const std::vector<Individual> pareto{individual({0, 1}, 0.99, 2.0), individual({2, 3}, 0.98, 1.5)};
  const VisibilityFn vis = [](const Chromosome& g) { return g[0] == 0 ? 0.8 : 0.9; };
  const auto out = select_final(pareto, {}, 0.97, vis);
  EXPECT_EQ(out.genes, (Chromosome{2, 3}));
  ASSERT_TRUE(out.avg_visibility.has_value());
  EXPECT_DOUBLE_EQ(*out.avg_visibility, 0.9);
  EXPECT_FALSE(out.below_threshold);
  EXPECT_EQ(out.kind, SelectionOutcome::Kind::Combination);
}

TEST(SelectFinal, PickPrefersCoverageThenDistance) {
  const std::vector<Individual> pareto{individual({0, 1}, 1.0, 3.0), individual({2, 3}, 0.98, 2.0)};
  EXPECT_EQ(select_final(pareto, {}, 0.97).genes, (Chromosome{0, 1}));

  const std::vector<Individual> tie{individual({0, 1}, 0.99, 2.4), individual({2, 3}, 0.99, 2.1)};
  EXPECT_EQ(select_final(tie, {}, 0.97).genes, (Chromosome{2, 3}));
}

TEST(SelectFinal, SinglesMergeAndBelowThresholdFlag) {
  const std::vector<Individual> pareto{individual({0, 1}, 0.9, 3.0)};
  const std::vector<Individual> singles{individual({4}, 0.99, 2.0)};
  const auto out = select_final(pareto, singles, 0.97);
  EXPECT_EQ(out.kind, SelectionOutcome::Kind::Single);
  EXPECT_EQ(out.genes, (Chromosome{4}));

  const std::vector<Individual> low{individual({0, 1}, 0.9, 3.0), individual({1, 2}, 0.8, 1.0)};
  const auto flagged = select_final(low, {}, 0.97);
  EXPECT_TRUE(flagged.below_threshold);
  EXPECT_EQ(flagged.objectives.coverage, 0.9);
  EXPECT_THROW(select_final({}, {}, 0.97), Error);
}
