#pragma once

// Analytical cost model: element traffic across the DRAM->L2, L2->L1 and
// L1->L0 boundaries, then latency, energy, power and EDP.
//
// Loop semantics. Level l iterates its parent tile (the layer for L2) in
// tiles of sizes_l: n_l(d) = ceil(parent(d) / size_l(d)). The parallel dim p_l
// is unrolled over a_l = min(pe_l, n_l(p_l)) units, leaving a temporal trip
// count t_l(p_l) = ceil(n_l(p_l) / a_l); other dims have t_l(d) = n_l(d).
// Concatenating the temporal loops of L2, L1, L0 (each in its own order)
// gives the full loop nest.
//
// Reuse. A buffer keeps its tile of a tensor until one of the tensor's
// relevant loop coordinates changes. With J the innermost loop (at or above
// level l) that is relevant to the tensor and has t > 1, the tile held at
// level l is loaded prod_{i <= J} t_i times. Units whose tiles differ only in
// irrelevant dims receive one multicast copy, so the spatial factor is the
// product of a_l' over levels l' <= l whose parallel dim is relevant.
// Edge tiles are padded to the full tile footprint. Partial outputs travel
// both ways: every output read is mirrored by a write-back.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "dcp/codespace.hpp"
#include "dcp/errors.hpp"
#include "dcp/tile.hpp"
#include "dcp/types.hpp"

namespace dcp {

/// Per-level trip counts of a dataflow applied to a layer.
struct LevelTrips {
  PerDim<std::int64_t> tiles{};     // n_l(d)
  PerDim<std::int64_t> temporal{};  // t_l(d)
  std::int64_t active = 1;          // a_l
};

inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

inline std::array<LevelTrips, kNumLevels> trip_counts(const LayerCode& layer, const DataflowCode& df) {
  std::array<LevelTrips, kNumLevels> out{};
  auto parent = layer.dims();
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    const auto& lv = df[l];
    auto& tr = out[l];
    for (Dim d : kAllDims) {
      tr.tiles[idx(d)] = ceil_div(parent[idx(d)], lv.size(d));
      tr.temporal[idx(d)] = tr.tiles[idx(d)];
    }
    const auto p = idx(lv.parallel_dim);
    tr.active = std::min(lv.pe_count, tr.tiles[p]);
    tr.temporal[p] = ceil_div(tr.tiles[p], tr.active);
    parent = lv.sizes;
  }
  return out;
}

/// Elements moved across each boundary (index = receiving level).
struct AccessProfile {
  std::array<std::array<double, kNumTensors>, kNumLevels> reads{};
  std::array<double, kNumLevels> output_writebacks{};
  double mac_count = 0.0;

  double read(std::size_t level, Tensor t) const { return reads[level][idx(t)]; }

  /// Reads of all tensors plus write-backs across one boundary.
  double boundary_total(std::size_t level) const {
    return reads[level][0] + reads[level][1] + reads[level][2] + output_writebacks[level];
  }
};

/// Number of times the tile of `tensor` held at `level` is (re)loaded,
/// ignoring spatial replication.
inline double tile_loads(const LayerCode& layer, const DataflowCode& df,
                         const std::array<LevelTrips, kNumLevels>& trips, std::size_t level,
                         Tensor tensor) {
  // Walk the concatenated nest from the innermost loop of `level` outwards
  // until the first relevant loop that actually iterates.
  std::size_t stop_level = 0, stop_pos = 0;
  bool found = false;
  for (std::size_t l = level + 1; l-- > 0 && !found;) {
    for (std::size_t i = kNumDims; i-- > 0;) {
      const Dim d = df[l].order[i];
      if (is_relevant(tensor, d, layer.type) && trips[l].temporal[idx(d)] > 1) {
        stop_level = l;
        stop_pos = i;
        found = true;
        break;
      }
    }
  }
  if (!found) return 1.0;
  double loads = 1.0;
  for (std::size_t l = 0; l <= stop_level; ++l) {
    const std::size_t last = l == stop_level ? stop_pos : kNumDims - 1;
    for (std::size_t i = 0; i <= last; ++i) loads *= double(trips[l].temporal[idx(df[l].order[i])]);
  }
  return loads;
}

/// Element traffic of a valid dataflow. Throws InvalidCode otherwise.
inline AccessProfile access_profile(const LayerCode& layer, const DataflowCode& df,
                                    const HwConfig& hw) {
  layer.check();
  if (auto r = validate(df, layer, hw); !r.ok()) throw InvalidCode("invalid dataflow: " + r.summary());
  const auto trips = trip_counts(layer, df);
  AccessProfile ap;
  ap.mac_count = double(macs(layer));
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    const Footprint fp = tile_footprint(df[l].sizes, layer);
    for (Tensor t : kAllTensors) {
      double spatial = 1.0;
      for (std::size_t up = 0; up <= l; ++up)
        if (is_relevant(t, df[up].parallel_dim, layer.type)) spatial *= double(trips[up].active);
      ap.reads[l][idx(t)] = double(fp[t]) * spatial * tile_loads(layer, df, trips, l, t);
    }
    ap.output_writebacks[l] = ap.reads[l][idx(Tensor::Output)];
  }
  return ap;
}

struct MetricVector {
  double latency = 0.0;  // cycles
  double energy = 0.0;   // nJ
  double power = 0.0;    // W
  double edp = 0.0;      // cycles * nJ

  friend bool operator==(const MetricVector&, const MetricVector&) = default;
};

/// Average power in watts of `energy_nj` spent over `latency_cycles`.
inline double average_power(double energy_nj, double latency_cycles, double clock_hz) {
  return energy_nj * 1e-9 / (latency_cycles / clock_hz);
}

/// Breakdown behind a MetricVector.
struct CostBreakdown {
  AccessProfile access;
  std::int64_t active_pes = 1;
  double compute_cycles = 0.0;
  std::array<double, kNumLevels> transfer_cycles{};
  MetricVector metrics;
};

inline CostBreakdown evaluate_detailed(const LayerCode& layer, const DataflowCode& df,
                                       const HwConfig& hw) {
  CostBreakdown out;
  out.access = access_profile(layer, df, hw);
  const auto trips = trip_counts(layer, df);
  for (const auto& tr : trips) out.active_pes *= tr.active;

  const std::int64_t mac = macs(layer);
  out.compute_cycles = double(ceil_div(mac, out.active_pes));
  double latency = out.compute_cycles;
  double energy = double(mac) * hw.energy_per_mac;
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    const double moved = out.access.boundary_total(l);
    out.transfer_cycles[l] = moved / hw.bandwidth[l];
    latency = std::max(latency, out.transfer_cycles[l]);
    energy += moved * hw.energy_per_access[l];
  }
  out.metrics.latency = latency;
  out.metrics.energy = energy;
  out.metrics.power = average_power(energy, latency, hw.clock_hz);
  out.metrics.edp = latency * energy;
  return out;
}

/// Latency, energy, power and EDP of a valid dataflow. Deterministic.
inline MetricVector evaluate(const LayerCode& layer, const DataflowCode& df, const HwConfig& hw) {
  return evaluate_detailed(layer, df, hw).metrics;
}

}  // namespace dcp
