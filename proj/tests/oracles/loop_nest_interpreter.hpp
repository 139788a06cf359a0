#pragma once

// Brute-force oracle for the cost model's access counts. It walks every step
// of the full three-level loop nest, keeps the tile resident in each unit's
// buffer, and counts a transfer whenever a buffer needs a different tile.
// Transfers of the same tile to several units at one step count once.
//
// Deliberately shares nothing with the analytical path except the tile
// footprint and relevance tables, which are checked on their own.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "dcp/tile.hpp"
#include "dcp/types.hpp"

namespace dcp::oracle {

struct SimulatedTraffic {
  std::array<std::array<std::int64_t, kNumTensors>, kNumLevels> reads{};
  std::int64_t steps = 0;
};

inline SimulatedTraffic simulate_tile_loads(const LayerCode& layer, const DataflowCode& df) {
  struct Loop {
    std::size_t level;
    Dim dim;
    std::int64_t trip;
  };
  std::array<PerDim<std::int64_t>, kNumLevels> temporal{};
  std::array<std::int64_t, kNumLevels> units{};
  auto parent = layer.dims();
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    for (Dim d : kAllDims) {
      std::int64_t tiles = 0;
      for (std::int64_t covered = 0; covered < parent[idx(d)]; covered += df[l].size(d)) ++tiles;
      temporal[l][idx(d)] = tiles;
    }
    const auto p = idx(df[l].parallel_dim);
    units[l] = std::min(df[l].pe_count, temporal[l][p]);
    std::int64_t groups = 0;
    for (std::int64_t done = 0; done < temporal[l][p]; done += units[l]) ++groups;
    temporal[l][p] = groups;
    parent = df[l].sizes;
  }

  std::vector<Loop> loops;
  for (std::size_t l = 0; l < kNumLevels; ++l)
    for (Dim d : df[l].order) loops.push_back({l, d, temporal[l][idx(d)]});

  // Resident tile per (level, tensor, unit path).
  using TileId = std::vector<std::int64_t>;
  std::array<std::array<std::map<std::vector<std::int64_t>, TileId>, kNumTensors>, kNumLevels> resident;

  SimulatedTraffic out;
  std::vector<std::int64_t> counter(loops.size(), 0);
  while (true) {
    ++out.steps;
    // Temporal coordinate of each (level, dim).
    std::array<PerDim<std::int64_t>, kNumLevels> coord{};
    for (std::size_t i = 0; i < loops.size(); ++i) coord[loops[i].level][idx(loops[i].dim)] = counter[i];

    for (std::size_t l = 0; l < kNumLevels; ++l) {
      const Footprint fp = tile_footprint(df[l].sizes, layer);
      // Enumerate unit paths u_0..u_l.
      std::vector<std::int64_t> path(l + 1, 0);
      std::array<std::set<TileId>, kNumTensors> requested;
      while (true) {
        // A tile is named by its coordinates along the tensor's dims at
        // every level down to l. Absolute origins would alias padded edge
        // tiles with the start of the next parent tile.
        for (Tensor t : kAllTensors) {
          TileId id;
          for (std::size_t up = 0; up <= l; ++up) {
            for (Dim d : kAllDims) {
              if (!is_relevant(t, d, layer.type)) continue;
              std::int64_t c = coord[up][idx(d)];
              if (d == df[up].parallel_dim) c = c * units[up] + path[up];
              id.push_back(c);
            }
          }
          auto& slot = resident[l][idx(t)];
          auto it = slot.find(path);
          if (it == slot.end() || it->second != id) {
            requested[idx(t)].insert(id);
            slot[path] = id;
          }
        }
        std::size_t k = 0;
        while (k <= l && ++path[k] == units[k]) path[k++] = 0;
        if (k > l) break;
      }
      for (Tensor t : kAllTensors)
        out.reads[l][idx(t)] += static_cast<std::int64_t>(requested[idx(t)].size()) * fp[t];
    }

    // Advance the odometer; the last loop is innermost.
    std::size_t i = loops.size();
    while (i > 0) {
      --i;
      if (++counter[i] < loops[i].trip) break;
      counter[i] = 0;
      if (i == 0) return out;
    }
    if (loops.empty()) return out;
  }
}

}  // namespace dcp::oracle
