#include <gtest/gtest.h>

#include <bit>

#include "dcp/baselines.hpp"
#include "dcp/hw_profiles.hpp"
#include "oracles/restricted_space.hpp"

namespace dcp {
namespace {

const LayerCode kLayer{4, 2, 6, 6, 3, 3, LayerType::Conv};

bool in_restricted(const DataflowCode& df, const LayerCode& layer, const SearchSpace& space) {
  if (df[0].sizes != layer.dims() || df[0].pe_count != 1 || df[0].parallel_dim != Dim::K) return false;
  for (std::size_t l = 0; l < kNumLevels; ++l)
    if (df[l].order != space.order) return false;
  for (std::size_t l = 1; l < kNumLevels; ++l) {
    const auto& lv = df[l];
    if (!std::has_single_bit(std::uint64_t(lv.pe_count)) || lv.pe_count > space.max_pe_per_level) return false;
    if (lv.pe_count == 1 && lv.parallel_dim != Dim::K) return false;
    for (std::size_t d = 0; d < kNumDims; ++d)
      if (!std::has_single_bit(std::uint64_t(lv.sizes[d])) || lv.sizes[d] > df[l - 1].sizes[d]) return false;
  }
  return true;
}

TEST(RestrictedSpace, EnumerationIsSmallValidAndClosedUnderProjection) {
  const HwConfig hw = eyeriss_preset();
  const SearchSpace space = SearchSpace::small_pow2();
  std::size_t seen = 0, checked = 0;
  const std::size_t n = oracle::for_each_restricted(kLayer, hw, space, [&](const DataflowCode& df) {
    ++seen;
    ASSERT_TRUE(in_restricted(df, kLayer, space));
    if (seen % 97 == 0) {
      ++checked;
      ASSERT_EQ(project(dataflow_vector(df), kLayer, hw, space), df);
    }
  });
  EXPECT_EQ(n, seen);
  EXPECT_LT(n, 1000000u);
  EXPECT_GT(n, 100000u);
  EXPECT_GT(checked, 1000u);
}

TEST(RestrictedSpace, SearchersStayInsideAndAboveTheOptimum) {
  const HwConfig hw = eyeriss_preset();
  const SearchSpace space = SearchSpace::small_pow2();
  double best = std::numeric_limits<double>::infinity();
  oracle::for_each_restricted(kLayer, hw, space,
                              [&](const DataflowCode& df) { best = std::min(best, evaluate(kLayer, df, hw).edp); });
  for (std::uint64_t s = 0; s < 200; ++s) {
    const DataflowCode df = sample_random(kLayer, hw, s, space);
    ASSERT_TRUE(in_restricted(df, kLayer, space)) << s;
    ASSERT_GE(evaluate(kLayer, df, hw).edp, best);
  }
  const SearchProblem prob{kLayer, hw, Goal::single(Metric::Edp), space};
  const auto ga = ga_search(prob, 2000, 3);
  EXPECT_TRUE(in_restricted(ga.dataflow, kLayer, space));
  EXPECT_GE(ga.metrics.edp, best);
  const auto hc = hill_climb(prob, 2000, 3);
  EXPECT_TRUE(in_restricted(hc.dataflow, kLayer, space));
  EXPECT_GE(hc.metrics.edp, best);
}

}  // namespace
}  // namespace dcp
