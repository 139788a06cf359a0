#include <gtest/gtest.h>

#include <set>

#include "dcp/baselines.hpp"
#include "dcp/hw_profiles.hpp"

namespace dcp {
namespace {

SearchProblem problem(Metric m = Metric::Edp) {
  SearchProblem p;
  p.layer = LayerCode{32, 16, 14, 14, 3, 3, LayerType::Conv};
  p.hw = eyeriss_preset();
  p.goal = Goal::single(m);
  return p;
}

TEST(RandomSearch, DeterministicAndValid) {
  const auto p = problem();
  const auto a = random_search(p, 300, 5);
  const auto b = random_search(p, 300, 5);
  EXPECT_EQ(a.dataflow, b.dataflow);
  EXPECT_EQ(a.score, b.score);
  EXPECT_EQ(a.evaluations, 300u);
  EXPECT_TRUE(validate(a.dataflow, p.layer, p.hw).ok());
  EXPECT_DOUBLE_EQ(a.score, std::log10(evaluate(p.layer, a.dataflow, p.hw).edp));
}

TEST(RandomSearch, HistoryIsPrefixOfLongerRuns) {
  const auto p = problem();
  const auto full = random_search(p, 200, 9);
  ASSERT_EQ(full.history.size(), 200u);
  for (std::size_t k : {1u, 7u, 50u, 199u}) EXPECT_EQ(random_search(p, k, 9).score, full.history[k - 1]);
  for (std::size_t i = 1; i < full.history.size(); ++i) EXPECT_LE(full.history[i], full.history[i - 1]);
}

TEST(RandomSearch, ZeroBudgetRejected) { EXPECT_THROW(random_search(problem(), 0, 1), ConfigError); }

TEST(Mutate, AlwaysValid) {
  const auto p = problem();
  Rng rng = make_rng(3);
  DataflowCode df = seeded_sample(p, 3, 0);
  for (int i = 0; i < 3000; ++i) {
    df = mutate(df, p, rng);
    ASSERT_TRUE(validate(df, p.layer, p.hw).ok()) << i;
  }
}

TEST(Mutate, RestrictedSpaceStaysInside) {
  auto p = problem();
  p.space = SearchSpace::small_pow2();
  Rng rng = make_rng(4);
  DataflowCode df = seeded_sample(p, 4, 0);
  for (int i = 0; i < 500; ++i) {
    df = mutate(df, p, rng);
    ASSERT_EQ(project(dataflow_vector(df), p.layer, p.hw, p.space), df);
  }
}

TEST(Ga, DegenerateSettingsReduceToRandomSearch) {
  const auto p = problem();
  GaParams g;
  g.population = 120;
  g.crossover = 0.0;
  g.mutation = 0.0;
  const auto ga = ga_search(p, 120, 11, g);
  const auto rs = random_search(p, 120, 11);
  EXPECT_EQ(ga.dataflow, rs.dataflow);
  EXPECT_EQ(ga.score, rs.score);
  EXPECT_EQ(ga.evaluations, 120u);
}

TEST(Ga, DeterministicAndWithinBudget) {
  const auto p = problem();
  const auto a = ga_search(p, 777, 2);
  const auto b = ga_search(p, 777, 2);
  EXPECT_EQ(a.dataflow, b.dataflow);
  EXPECT_LE(a.evaluations, 777u);
  EXPECT_GE(a.evaluations, 700u);
  EXPECT_TRUE(validate(a.dataflow, p.layer, p.hw).ok());
  EXPECT_THROW(ga_search(p, 10, 2), ConfigError);
}

TEST(Ga, BeatsItsInitialPopulation) {
  const auto p = problem();
  const auto ga = ga_search(p, 2000, 6);
  EXPECT_LT(ga.score, random_search(p, 50, 6).score);
}

TEST(HillClimb, AcceptedScoresStrictlyDecrease) {
  const auto p = problem();
  std::vector<std::vector<double>> acc;
  HillClimbParams hc;
  hc.patience = 30;
  const auto r = hill_climb(p, 1500, 8, hc, &acc);
  EXPECT_EQ(r.evaluations, 1500u);
  EXPECT_GT(acc.size(), 1u);  // restarted at least once
  double best = std::numeric_limits<double>::infinity();
  for (const auto& climb : acc) {
    for (std::size_t i = 1; i < climb.size(); ++i) EXPECT_LT(climb[i], climb[i - 1]);
    best = std::min(best, climb.back());
  }
  EXPECT_EQ(best, r.score);
}

TEST(HillClimb, FirstPointIsSampleZero) {
  const auto p = problem();
  const auto r = hill_climb(p, 1, 21);
  EXPECT_EQ(r.dataflow, seeded_sample(p, 21, 0));
}

TEST(Optimizers, CommonInterface) {
  const auto p = problem(Metric::Latency);
  std::vector<std::unique_ptr<Optimizer>> opts;
  opts.push_back(std::make_unique<RandomSearch>());
  opts.push_back(std::make_unique<GeneticSearch>());
  opts.push_back(std::make_unique<HillClimb>());
  std::set<std::string> names;
  for (const auto& o : opts) {
    const auto r = o->run(p, 400, 1);
    names.insert(r.method);
    EXPECT_EQ(r.method, o->name());
    EXPECT_TRUE(validate(r.dataflow, p.layer, p.hw).ok());
    EXPECT_DOUBLE_EQ(r.score, std::log10(r.metrics.latency));
  }
  EXPECT_EQ(names.size(), 3u);
}

TEST(Shared, EnvelopeContainsEveryLayer) {
  const std::vector<LayerCode> ls = {{64, 32, 28, 28, 3, 3, LayerType::Conv},
                                     {16, 16, 56, 56, 1, 1, LayerType::Conv},
                                     {32, 32, 14, 14, 3, 3, LayerType::Depthwise}};
  const LayerCode e = envelope_layer(ls);
  EXPECT_EQ(e, (LayerCode{64, 32, 56, 56, 3, 3, LayerType::Conv}));
  const LayerCode dw = envelope_layer({ls[2], {8, 8, 7, 7, 3, 3, LayerType::Depthwise}});
  EXPECT_EQ(dw.type, LayerType::Depthwise);
  const HwConfig hw = eyeriss_preset();
  const DataflowCode df = sample_random(e, hw, 4);
  for (const auto& l : ls) EXPECT_TRUE(validate(instantiate(df, l, hw), l, hw).ok());
}

TEST(Shared, SingleLayerScoreMatchesGoal) {
  const auto p = problem();
  const DataflowCode df = seeded_sample(p, 1, 0);
  EXPECT_EQ(shared_score(df, {p.layer}, p.hw, p.goal, {}), p.goal.score(evaluate(p.layer, df, p.hw)));
  const double two = shared_score(df, {p.layer, p.layer}, p.hw, p.goal, {});
  EXPECT_NEAR(two, p.goal.score(evaluate(p.layer, df, p.hw)) + std::log10(2.0), 1e-12);
}

TEST(Shared, RandomSharedDeterministic) {
  const std::vector<LayerCode> ls = {{64, 32, 28, 28, 3, 3, LayerType::Conv}, {16, 64, 14, 14, 1, 1, LayerType::Conv}};
  const auto a = random_search_shared(ls, eyeriss_preset(), Goal::single(Metric::Energy), 100, 3);
  const auto b = random_search_shared(ls, eyeriss_preset(), Goal::single(Metric::Energy), 100, 3);
  EXPECT_EQ(a.dataflow, b.dataflow);
  EXPECT_EQ(a.score, b.score);
  ASSERT_EQ(a.metrics.size(), 2u);
}

}  // namespace
}  // namespace dcp
