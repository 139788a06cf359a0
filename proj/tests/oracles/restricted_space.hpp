#pragma once

// Exhaustive walk over SearchSpace::small_pow2 for a small layer: L2 holds
// the whole layer, fixed loop order, power-of-two L1/L0 tiles nested in
// their parent, power-of-two PE counts up to the per-level cap, and K as
// the parallel dim of idle levels.

#include <cstdint>
#include <functional>
#include <vector>

#include "dcp/codespace.hpp"

namespace dcp::oracle {

inline std::vector<std::int64_t> pow2_upto(std::int64_t n) {
  std::vector<std::int64_t> v;
  for (std::int64_t p = 1; p <= n; p *= 2) v.push_back(p);
  return v;
}

/// Calls fn on every valid member of the restricted space; returns the count.
inline std::size_t for_each_restricted(const LayerCode& layer, const HwConfig& hw, const SearchSpace& space,
                                       const std::function<void(const DataflowCode&)>& fn) {
  const auto dims = layer.dims();
  struct Par {
    Dim dim;
    std::int64_t pe;
  };
  std::vector<Par> pars{{Dim::K, 1}};
  for (std::int64_t pe : pow2_upto(space.max_pe_per_level))
    if (pe > 1)
      for (Dim d : kAllDims) pars.push_back({d, pe});

  // Nested (L1, L0) size pairs per dim.
  std::array<std::vector<std::pair<std::int64_t, std::int64_t>>, kNumDims> pairs;
  for (std::size_t d = 0; d < kNumDims; ++d)
    for (auto a : pow2_upto(dims[d]))
      for (auto b : pow2_upto(a)) pairs[d].push_back({a, b});

  DataflowCode df;
  df[0].sizes = dims;
  df[0].pe_count = 1;
  df[0].parallel_dim = Dim::K;
  for (auto& lv : df.levels) lv.order = space.order;
  std::size_t count = 0;
  std::array<std::size_t, kNumDims> at{};
  for (;;) {
    for (std::size_t d = 0; d < kNumDims; ++d) {
      df[1].sizes[d] = pairs[d][at[d]].first;
      df[2].sizes[d] = pairs[d][at[d]].second;
    }
    for (const auto& p1 : pars)
      for (const auto& p0 : pars) {
        df[1].parallel_dim = p1.dim;
        df[1].pe_count = p1.pe;
        df[2].parallel_dim = p0.dim;
        df[2].pe_count = p0.pe;
        if (!validate(df, layer, hw).ok()) continue;
        fn(df);
        ++count;
      }
    std::size_t d = 0;
    while (d < kNumDims && ++at[d] == pairs[d].size()) at[d++] = 0;
    if (d == kNumDims) break;
  }
  return count;
}

}  // namespace dcp::oracle
