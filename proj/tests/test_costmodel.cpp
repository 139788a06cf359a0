#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dcp/codespace.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/hw_profiles.hpp"
#include "oracles/loop_nest_interpreter.hpp"

namespace dcp {
namespace {

const LayerCode kNine{1, 1, 3, 3, 1, 1, LayerType::Conv};

HwConfig roomy() {
  HwConfig hw = eyeriss_preset();
  hw.l2_bytes = hw.l1_bytes = hw.l0_bytes = 1 << 20;
  return hw;
}

TEST(Macs, Examples) {
  EXPECT_EQ(macs(LayerCode{}), 1);
  EXPECT_EQ(macs(LayerCode{64, 3, 224, 224, 7, 7, LayerType::Conv}), 447105792);
  EXPECT_EQ(macs(LayerCode{8, 8, 5, 5, 3, 3, LayerType::Depthwise}), 648);
  EXPECT_EQ(macs(LayerCode{10, 20, 3, 4, 1, 1, LayerType::Gemm}), 2400);
}

TEST(Footprint, Examples) {
  const LayerCode conv{8, 8, 8, 8, 3, 3, LayerType::Conv};
  EXPECT_EQ(tile_footprint({2, 3, 5, 5, 3, 3}, conv), (Footprint{75, 54, 18}));
  EXPECT_EQ(tile_footprint({1, 1, 1, 1, 1, 1}, conv), (Footprint{1, 1, 1}));
  const LayerCode dw{8, 8, 8, 8, 3, 3, LayerType::Depthwise};
  EXPECT_EQ(tile_footprint({4, 4, 3, 3, 3, 3}, dw), (Footprint{36, 36, 4}));
}

TEST(Access, SingleTileEverywhere) {
  const auto ap = access_profile(kNine, DataflowCode::full_tiles(kNine), eyeriss_preset());
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    EXPECT_EQ(ap.read(l, Tensor::Input), 9);
    EXPECT_EQ(ap.read(l, Tensor::Weight), 1);
    EXPECT_EQ(ap.read(l, Tensor::Output), 9);
    EXPECT_EQ(ap.output_writebacks[l], 9);
  }
  EXPECT_EQ(ap.mac_count, 9);
}

TEST(Access, RowTilesWithYOutermost) {
  DataflowCode df = DataflowCode::full_tiles(kNine);
  df[2].sizes[idx(Dim::Y)] = 1;
  df[2].order = {Dim::Y, Dim::K, Dim::C, Dim::X, Dim::R, Dim::S};
  const auto ap = access_profile(kNine, df, eyeriss_preset());
  EXPECT_EQ(ap.read(2, Tensor::Input), 9);
  EXPECT_EQ(ap.read(2, Tensor::Weight), 1);
}

TEST(Access, WeightInvariantToInnerReorder) {
  const LayerCode layer{8, 4, 12, 12, 3, 3, LayerType::Conv};
  DataflowCode df = DataflowCode::all_ones();
  df[0].sizes = {4, 2, 6, 6, 3, 3};
  df[1].sizes = {2, 2, 4, 4, 3, 3};
  df[2].sizes = {1, 1, 2, 2, 1, 1};
  df[1].order = {Dim::K, Dim::C, Dim::R, Dim::S, Dim::Y, Dim::X};
  const HwConfig hw = roomy();
  const double w = access_profile(layer, df, hw).read(1, Tensor::Weight);
  df[1].order = {Dim::K, Dim::C, Dim::R, Dim::S, Dim::X, Dim::Y};
  EXPECT_EQ(access_profile(layer, df, hw).read(1, Tensor::Weight), w);
}

TEST(Access, InvalidCodeThrows) {
  DataflowCode df = DataflowCode::all_ones();
  df[0].pe_count = 1000;
  EXPECT_THROW(evaluate(kNine, df, eyeriss_preset()), InvalidCode);
}

TEST(Evaluate, HandTracedNineMacLayer) {
  const MetricVector m = evaluate(kNine, DataflowCode::full_tiles(kNine), eyeriss_preset());
  // (9 + 1 + 9) * 208 reads, 9 * 208 write-backs, 9 MACs.
  EXPECT_EQ(m.energy, 5833.0);
  EXPECT_EQ(m.latency, 9.0);
  EXPECT_EQ(m.edp, 9.0 * 5833.0);
  EXPECT_DOUBLE_EQ(m.power, 5833e-9 / (9.0 / 200e6));
}

TEST(Evaluate, PowerUnits) {
  EXPECT_DOUBLE_EQ(average_power(1000.0, 1000.0, 1e9), 1.0);
}

TEST(Evaluate, TransferBoundLatency) {
  HwConfig hw = eyeriss_preset();
  hw.bandwidth = {1.0, 64.0, 256.0};
  const MetricVector m = evaluate(kNine, DataflowCode::full_tiles(kNine), hw);
  EXPECT_EQ(m.latency, 28.0);  // 9 + 1 + 9 + 9 elements at one word per cycle
}

LayerCode small_layer(Rng& rng, std::int64_t max_dim) {
  std::uniform_int_distribution<std::int64_t> d(1, max_dim);
  std::uniform_int_distribution<int> t(0, 2);
  LayerCode l;
  l.type = static_cast<LayerType>(t(rng));
  l.k = d(rng);
  l.c = l.type == LayerType::Depthwise ? l.k : d(rng);
  l.y = d(rng);
  l.x = d(rng);
  if (l.type == LayerType::Gemm) {
    l.r = l.s = 1;
  } else {
    l.r = std::uniform_int_distribution<std::int64_t>(1, l.y)(rng);
    l.s = std::uniform_int_distribution<std::int64_t>(1, l.x)(rng);
  }
  return l;
}

TEST(Properties, DeterministicAndComputeBound) {
  const HwConfig hw = eyeriss_preset();
  Rng rng(21);
  for (int i = 0; i < 3000; ++i) {
    const LayerCode layer = small_layer(rng, 64);
    const DataflowCode df = sample_random(layer, hw, rng);
    const MetricVector a = evaluate(layer, df, hw);
    const MetricVector b = evaluate(layer, df, hw);
    ASSERT_EQ(a, b);
    EXPECT_GE(a.latency, double(ceil_div(macs(layer), hw.pe_total)));
    EXPECT_EQ(a.edp, a.latency * a.energy);
    EXPECT_EQ(access_profile(layer, df, hw).mac_count, double(macs(layer)));
  }
}

TEST(Properties, EnergyMonotoneInAccessEnergy) {
  const HwConfig hw = eyeriss_preset();
  Rng rng(22);
  for (int i = 0; i < 500; ++i) {
    const LayerCode layer = small_layer(rng, 32);
    const DataflowCode df = sample_random(layer, hw, rng);
    const double base = evaluate(layer, df, hw).energy;
    for (std::size_t l = 0; l < kNumLevels; ++l) {
      HwConfig more = hw;
      more.energy_per_access[l] *= 1.5;
      EXPECT_GE(evaluate(layer, df, more).energy, base);
    }
  }
}

TEST(Properties, MorePesNeverSlowCompute) {
  const HwConfig hw = eyeriss_preset();
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    const LayerCode layer = small_layer(rng, 32);
    DataflowCode df = sample_random(layer, hw, rng);
    for (std::size_t l = 0; l < kNumLevels; ++l) {
      DataflowCode more = df;
      more[l].pe_count += 1;
      if (!validate(more, layer, hw).ok()) continue;
      EXPECT_LE(evaluate_detailed(layer, more, hw).compute_cycles,
                evaluate_detailed(layer, df, hw).compute_cycles);
    }
  }
}

TEST(Properties, ReadsCoverTheData) {
  // Every element of input and weight must cross each boundary at least once.
  // Output footprints shrink by the halo of partial tiles, so they are left out.
  const HwConfig hw = eyeriss_preset();
  Rng rng(24);
  for (int i = 0; i < 2000; ++i) {
    const LayerCode layer = small_layer(rng, 48);
    const DataflowCode df = sample_random(layer, hw, rng);
    const auto ap = access_profile(layer, df, hw);
    const Footprint whole = tile_footprint(layer.dims(), layer);
    for (std::size_t l = 0; l < kNumLevels; ++l) {
      EXPECT_GE(ap.read(l, Tensor::Input), double(whole.input));
      EXPECT_GE(ap.read(l, Tensor::Weight), double(whole.weight));
    }
  }
}

TEST(Oracle, MatchesLoopNestSimulationOnSmallLayers) {
  const HwConfig hw = roomy();
  Rng rng(25);
  int checked = 0;
  for (int i = 0; i < 1500; ++i) {
    const LayerCode layer = small_layer(rng, 4);
    const DataflowCode df = sample_random(layer, hw, rng);
    const auto ap = access_profile(layer, df, hw);
    const auto sim = oracle::simulate_tile_loads(layer, df);
    for (std::size_t l = 0; l < kNumLevels; ++l)
      for (Tensor t : kAllTensors)
        ASSERT_EQ(ap.read(l, t), double(sim.reads[l][idx(t)]))
            << "level " << l << " tensor " << idx(t) << " layer " << layer.k << "," << layer.c << ","
            << layer.y << "," << layer.x << "," << layer.r << "," << layer.s;
    ++checked;
  }
  EXPECT_EQ(checked, 1500);
}

TEST(Oracle, MatchesOnHandPickedNests) {
  const HwConfig hw = roomy();
  const LayerCode layer{4, 4, 4, 4, 2, 2, LayerType::Conv};
  DataflowCode df;
  df[0] = {Dim::C, 2, {Dim::Y, Dim::K, Dim::C, Dim::X, Dim::R, Dim::S}, {4, 2, 4, 4, 2, 2}};
  df[1] = {Dim::K, 2, {Dim::X, Dim::R, Dim::S, Dim::K, Dim::C, Dim::Y}, {2, 1, 2, 4, 2, 1}};
  df[2] = {Dim::X, 3, {Dim::S, Dim::R, Dim::Y, Dim::X, Dim::C, Dim::K}, {1, 1, 1, 1, 1, 1}};
  ASSERT_TRUE(validate(df, layer, hw).ok());
  const auto ap = access_profile(layer, df, hw);
  const auto sim = oracle::simulate_tile_loads(layer, df);
  for (std::size_t l = 0; l < kNumLevels; ++l)
    for (Tensor t : kAllTensors) EXPECT_EQ(ap.read(l, t), double(sim.reads[l][idx(t)])) << l;
}

}  // namespace
}  // namespace dcp
