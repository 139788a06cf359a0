#pragma once

// Unified layer/dataflow code space: flat encoding, validation, projection of
// arbitrary real vectors onto valid codes, and constrained random sampling.
//
// Flat code layout (49 reals):
//   [0..6]   K, C, Y, X, R, S, T
//   per level l in (L2, L1, L0), base = 7 + 14 l:
//     base + 0          parallel dim index
//     base + 1          PE count of the parallel dim
//     base + 2 + 2 i    dim index at loop position i (outermost first)
//     base + 3 + 2 i    partitioning size of that dim
// Dim indices: K=0, C=1, Y=2, X=3, R=4, S=5.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcp/errors.hpp"
#include "dcp/rng.hpp"
#include "dcp/tile.hpp"
#include "dcp/types.hpp"

namespace dcp {

using DataflowVector = std::array<double, kDataflowSlots>;

struct FlatCode {
  std::array<double, kCodeSlots> values{};

  std::span<const double, kLayerSlots> layer_part() const {
    return std::span<const double, kCodeSlots>(values).first<kLayerSlots>();
  }
  std::span<const double, kDataflowSlots> dataflow_part() const {
    return std::span<const double, kCodeSlots>(values).last<kDataflowSlots>();
  }

  friend bool operator==(const FlatCode&, const FlatCode&) = default;
};

constexpr std::size_t level_base(std::size_t level) noexcept { return level * kLevelSlots; }

inline std::array<double, kLayerSlots> layer_vector(const LayerCode& layer) {
  return {double(layer.k), double(layer.c), double(layer.y), double(layer.x),
          double(layer.r), double(layer.s), double(static_cast<int>(layer.type))};
}

/// The 42-entry tail of the flat code. No validation.
inline DataflowVector dataflow_vector(const DataflowCode& df) {
  DataflowVector v{};
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    const auto& lv = df[l];
    const std::size_t b = level_base(l);
    v[b] = double(idx(lv.parallel_dim));
    v[b + 1] = double(lv.pe_count);
    for (std::size_t i = 0; i < kNumDims; ++i) {
      v[b + 2 + 2 * i] = double(idx(lv.order[i]));
      v[b + 3 + 2 * i] = double(lv.size(lv.order[i]));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  PermutationBroken,
  SizeExceedsDim,  // also raised for sizes below 1
  NestingNonMonotone,
  PeBudgetExceeded,  // also raised for PE counts below 1
  BufferOverflow,
};

inline std::string_view violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::PermutationBroken: return "PermutationBroken";
    case ViolationKind::SizeExceedsDim: return "SizeExceedsDim";
    case ViolationKind::NestingNonMonotone: return "NestingNonMonotone";
    case ViolationKind::PeBudgetExceeded: return "PeBudgetExceeded";
    case ViolationKind::BufferOverflow: return "BufferOverflow";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  std::size_t level = 0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }

  bool has(ViolationKind k) const noexcept {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
  }

  bool has(ViolationKind k, std::size_t level) const noexcept {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) {
      return v.kind == k && v.level == level;
    });
  }

  std::string summary() const {
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += std::string(violation_name(v.kind)) + "@" + std::string(level_name(v.level));
      if (!v.detail.empty()) s += " (" + v.detail + ")";
    }
    return s;
  }
};

namespace detail {

inline void add(ValidationReport& r, ViolationKind k, std::size_t level, std::string detail = {}) {
  r.violations.push_back({k, level, std::move(detail)});
}

}  // namespace detail

/// Checks that need only the layer: permutations, size ranges, nesting.
inline ValidationReport check_structure(const DataflowCode& df, const LayerCode& layer) {
  ValidationReport r;
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    const auto& lv = df[l];
    std::array<int, kNumDims> seen{};
    bool perm_ok = true;
    for (Dim d : lv.order) {
      if (idx(d) >= kNumDims || seen[idx(d)]++) perm_ok = false;
    }
    if (idx(lv.parallel_dim) >= kNumDims) perm_ok = false;
    if (!perm_ok) detail::add(r, ViolationKind::PermutationBroken, l);
    if (lv.pe_count < 1) detail::add(r, ViolationKind::PeBudgetExceeded, l, "pe_count < 1");
    for (Dim d : kAllDims) {
      const auto s = lv.size(d);
      if (s < 1 || s > layer.dim(d))
        detail::add(r, ViolationKind::SizeExceedsDim, l,
                    std::string(dim_name(d)) + "=" + std::to_string(s));
    }
    if (l > 0) {
      for (Dim d : kAllDims) {
        if (lv.size(d) > df[l - 1].size(d)) {
          detail::add(r, ViolationKind::NestingNonMonotone, l, std::string(dim_name(d)));
          break;
        }
      }
    }
  }
  return r;
}

/// All constraints: structure, the PE budget and per-cluster buffer capacities.
inline ValidationReport validate(const DataflowCode& df, const LayerCode& layer,
                                 const HwConfig& hw) {
  ValidationReport r = check_structure(df, layer);
  const auto pes = df.total_pes();
  if (pes > hw.pe_total)
    detail::add(r, ViolationKind::PeBudgetExceeded, 0,
                std::to_string(pes) + " > " + std::to_string(hw.pe_total));
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    const auto bytes = tile_footprint(df[l].sizes, layer).total() * hw.bytes_per_element;
    if (bytes > hw.capacity_bytes(l))
      detail::add(r, ViolationKind::BufferOverflow, l,
                  std::to_string(bytes) + " > " + std::to_string(hw.capacity_bytes(l)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Encoding

inline FlatCode encode(const LayerCode& layer, const DataflowCode& df) {
  layer.check();
  if (auto r = check_structure(df, layer); !r.ok()) throw InvalidCode("invalid dataflow: " + r.summary());
  FlatCode code;
  const auto lv = layer_vector(layer);
  std::copy(lv.begin(), lv.end(), code.values.begin());
  const auto dv = dataflow_vector(df);
  std::copy(dv.begin(), dv.end(), code.values.begin() + kLayerSlots);
  return code;
}

namespace detail {

inline std::int64_t exact_int(double v, const char* what) {
  if (!std::isfinite(v) || v != std::floor(v) || std::fabs(v) > 9.0e15)
    throw InvalidCode(std::string("non-integral ") + what);
  return static_cast<std::int64_t>(v);
}

inline Dim exact_dim(double v) {
  const auto i = exact_int(v, "dim index");
  if (i < 0 || i >= static_cast<std::int64_t>(kNumDims)) throw InvalidCode("dim index out of range");
  return dim_at(static_cast<std::size_t>(i));
}

}  // namespace detail

inline LayerCode decode_layer(std::span<const double> v) {
  if (v.size() < kLayerSlots) throw ShapeMismatch("layer code needs 7 entries");
  LayerCode layer;
  layer.k = detail::exact_int(v[0], "K");
  layer.c = detail::exact_int(v[1], "C");
  layer.y = detail::exact_int(v[2], "Y");
  layer.x = detail::exact_int(v[3], "X");
  layer.r = detail::exact_int(v[4], "R");
  layer.s = detail::exact_int(v[5], "S");
  const auto t = detail::exact_int(v[6], "T");
  if (t < 0 || t > 2) throw InvalidCode("layer type out of range");
  layer.type = static_cast<LayerType>(t);
  layer.check();
  return layer;
}

/// Reads a 42-entry integer tail. Repeated dims in an order are reported by
/// the structural check, not here.
inline DataflowCode decode_dataflow(std::span<const double> v) {
  if (v.size() != kDataflowSlots) throw ShapeMismatch("dataflow code needs 42 entries");
  DataflowCode df;
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    auto& lv = df[l];
    const std::size_t b = level_base(l);
    lv.parallel_dim = detail::exact_dim(v[b]);
    lv.pe_count = detail::exact_int(v[b + 1], "PE count");
    std::array<bool, kNumDims> seen{};
    for (std::size_t i = 0; i < kNumDims; ++i) {
      const Dim d = detail::exact_dim(v[b + 2 + 2 * i]);
      if (seen[idx(d)]) throw InvalidCode("order of " + std::string(level_name(l)) + " is not a permutation");
      seen[idx(d)] = true;
      lv.order[i] = d;
      lv.sizes[idx(d)] = detail::exact_int(v[b + 3 + 2 * i], "size");
    }
  }
  return df;
}

inline std::pair<LayerCode, DataflowCode> decode(const FlatCode& code) {
  const LayerCode layer = decode_layer(code.layer_part());
  const DataflowCode df = decode_dataflow(code.dataflow_part());
  if (auto r = check_structure(df, layer); !r.ok()) throw InvalidCode("invalid dataflow: " + r.summary());
  return {layer, df};
}

// ---------------------------------------------------------------------------
// Search-space restrictions

/// Optional restrictions of the full code space. The default is unrestricted.
struct SearchSpace {
  bool pow2_sizes = false;        // L1/L0 sizes are powers of two
  bool outer_holds_layer = false;  // L2 tile is the whole layer, one cluster
  bool fixed_order = false;        // every level uses `order`
  std::array<Dim, kNumDims> order = kAllDims;
  std::int64_t max_pe_per_level = 0;  // 0: unlimited
  bool pow2_pes = false;
  bool canonical_idle_parallel = false;  // pe_count 1 forces parallel dim K

  static SearchSpace full() { return {}; }

  /// L2 fixed to the full layer, canonical loop order everywhere, power-of-two
  /// tiles and PE counts of at most `max_pe` per inner level.
  static SearchSpace small_pow2(std::int64_t max_pe = 4) {
    SearchSpace s;
    s.pow2_sizes = true;
    s.outer_holds_layer = true;
    s.fixed_order = true;
    s.max_pe_per_level = max_pe;
    s.pow2_pes = true;
    s.canonical_idle_parallel = true;
    return s;
  }

  bool unrestricted() const noexcept {
    return !pow2_sizes && !outer_holds_layer && !fixed_order && max_pe_per_level == 0 &&
           !pow2_pes && !canonical_idle_parallel;
  }
};

namespace detail {

inline std::int64_t floor_pow2(std::int64_t v) {
  std::int64_t p = 1;
  while (p * 2 <= v) p *= 2;
  return p;
}

inline std::int64_t nearest_pow2(std::int64_t v) {
  if (v <= 1) return 1;
  const double e = std::round(std::log2(static_cast<double>(v)));
  return std::int64_t{1} << static_cast<int>(std::min(e, 62.0));
}

}  // namespace detail

/// Brings a structurally well-formed dataflow (orders are permutations) into
/// the valid region: restrictions, size ranges, nesting, PE budget, buffers.
/// Leaves valid codes of the search space unchanged.
inline void repair(DataflowCode& df, const LayerCode& layer, const HwConfig& hw,
                   const SearchSpace& space = {}) {
  const auto dims = layer.dims();

  for (std::size_t l = 0; l < kNumLevels; ++l) {
    auto& lv = df[l];
    if (space.fixed_order) lv.order = space.order;
    for (Dim d : kAllDims) {
      auto& s = lv.sizes[idx(d)];
      s = std::clamp<std::int64_t>(s, 1, dims[idx(d)]);
      if (space.pow2_sizes && !(l == 0 && space.outer_holds_layer))
        s = std::min(detail::nearest_pow2(s), detail::floor_pow2(dims[idx(d)]));
    }
  }
  if (space.outer_holds_layer) {
    auto& top = df[0];
    top.sizes = dims;
    top.pe_count = 1;
    top.parallel_dim = Dim::K;
    top.order = space.fixed_order ? space.order : kAllDims;
  }

  const auto clamp_children = [&](std::size_t from) {
    for (std::size_t l = std::max<std::size_t>(from, 1); l < kNumLevels; ++l)
      for (Dim d : kAllDims)
        df[l].sizes[idx(d)] = std::min(df[l].sizes[idx(d)], df[l - 1].sizes[idx(d)]);
  };
  clamp_children(1);

  std::int64_t budget = hw.pe_total;
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    auto& lv = df[l];
    std::int64_t cap = budget;
    if (space.max_pe_per_level > 0) cap = std::min(cap, space.max_pe_per_level);
    std::int64_t pe = std::clamp<std::int64_t>(lv.pe_count, 1, std::max<std::int64_t>(cap, 1));
    if (space.pow2_pes) pe = std::min(detail::nearest_pow2(pe), detail::floor_pow2(cap));
    lv.pe_count = pe;
    if (space.canonical_idle_parallel && pe == 1) lv.parallel_dim = Dim::K;
    budget = std::max<std::int64_t>(budget / pe, 1);
  }

  // Shrink the largest tile dimension until each level's tile fits its buffer.
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    auto& sizes = df[l].sizes;
    const std::int64_t cap = hw.capacity_bytes(l);
    while (tile_footprint(sizes, layer).total() * hw.bytes_per_element > cap) {
      std::size_t widest = 0;
      for (std::size_t i = 1; i < kNumDims; ++i)
        if (sizes[i] > sizes[widest]) widest = i;
      if (sizes[widest] == 1) break;  // unreachable for a checked HwConfig
      sizes[widest] = std::max<std::int64_t>(sizes[widest] / 2, 1);
    }
    clamp_children(l + 1);
  }
}

/// Maps an arbitrary real 42-vector to a valid dataflow.
///
/// Entries are rounded to the nearest integer. Each level's six order slots
/// become a permutation by a stable argsort of their raw dim values (ties by
/// slot), and each size follows the dim assigned to its slot. Parallel dims
/// are clamped to 0..5, sizes to [1, dim], child sizes to their parent, PE
/// counts to the remaining budget top-down, and oversized tiles are halved
/// along their widest dimension. Idempotent on its own output.
inline DataflowCode project(std::span<const double> raw, const LayerCode& layer,
                            const HwConfig& hw, const SearchSpace& space = {}) {
  if (raw.size() != kDataflowSlots) throw ShapeMismatch("projection needs 42 entries");
  layer.check();
  const auto clean = [](double v) {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, -1e12, 1e12);
  };
  const auto rounded = [&](double v) { return static_cast<std::int64_t>(std::llround(clean(v))); };

  DataflowCode df;
  for (std::size_t l = 0; l < kNumLevels; ++l) {
    auto& lv = df[l];
    const std::size_t b = level_base(l);
    lv.parallel_dim = dim_at(static_cast<std::size_t>(std::clamp<std::int64_t>(rounded(raw[b]), 0, 5)));
    lv.pe_count = rounded(raw[b + 1]);

    std::array<std::size_t, kNumDims> slots;
    std::iota(slots.begin(), slots.end(), 0);
    std::stable_sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t c) {
      return clean(raw[b + 2 + 2 * a]) < clean(raw[b + 2 + 2 * c]);
    });
    for (std::size_t rank = 0; rank < kNumDims; ++rank) lv.order[slots[rank]] = dim_at(rank);
    for (std::size_t slot = 0; slot < kNumDims; ++slot)
      lv.sizes[idx(lv.order[slot])] = rounded(raw[b + 3 + 2 * slot]);
  }
  repair(df, layer, hw, space);
  return df;
}

// ---------------------------------------------------------------------------
// Sampling

namespace detail {

/// Integer drawn log-uniformly from [1, n].
inline std::int64_t log_uniform_int(Rng& rng, std::int64_t n) {
  if (n <= 1) return 1;
  std::uniform_real_distribution<double> u(0.0, std::log(static_cast<double>(n) + 1.0));
  const auto v = static_cast<std::int64_t>(std::floor(std::exp(u(rng))));
  return std::clamp<std::int64_t>(v, 1, n);
}

}  // namespace detail

inline constexpr int kMaxSampleAttempts = 1000;

/// Random valid dataflow. Sizes are log-uniform within the parent tile,
/// PE counts log-uniform within the remaining budget, orders and parallel
/// dims uniform; the draw is projected and rejection-sampled against validate.
inline DataflowCode sample_random(const LayerCode& layer, const HwConfig& hw, Rng& rng,
                                  const SearchSpace& space = {}) {
  std::uniform_int_distribution<int> pick_dim(0, kNumDims - 1);
  for (int attempt = 0; attempt < kMaxSampleAttempts; ++attempt) {
    DataflowVector raw{};
    std::int64_t budget = hw.pe_total;
    auto parent = layer.dims();
    for (std::size_t l = 0; l < kNumLevels; ++l) {
      const std::size_t b = level_base(l);
      raw[b] = pick_dim(rng);
      std::int64_t cap = budget;
      if (space.max_pe_per_level > 0) cap = std::min(cap, space.max_pe_per_level);
      const auto pe = detail::log_uniform_int(rng, cap);
      raw[b + 1] = double(pe);
      budget = std::max<std::int64_t>(budget / pe, 1);
      std::array<Dim, kNumDims> order = kAllDims;
      std::shuffle(order.begin(), order.end(), rng);
      PerDim<std::int64_t> sizes{};
      for (Dim d : kAllDims) sizes[idx(d)] = detail::log_uniform_int(rng, parent[idx(d)]);
      for (std::size_t i = 0; i < kNumDims; ++i) {
        raw[b + 2 + 2 * i] = double(idx(order[i]));
        raw[b + 3 + 2 * i] = double(sizes[idx(order[i])]);
      }
      parent = sizes;
    }
    DataflowCode df = project(raw, layer, hw, space);
    if (validate(df, layer, hw).ok()) return df;
  }
  DataflowCode df = DataflowCode::all_ones();
  for (auto& lv : df.levels) {
    std::shuffle(lv.order.begin(), lv.order.end(), rng);
    lv.parallel_dim = dim_at(static_cast<std::size_t>(pick_dim(rng)));
  }
  repair(df, layer, hw, space);
  return df;
}

inline DataflowCode sample_random(const LayerCode& layer, const HwConfig& hw, std::uint64_t seed,
                                  const SearchSpace& space = {}) {
  Rng rng = make_rng(seed);
  return sample_random(layer, hw, rng, space);
}

/// log10 of (K C Y X R S * 6! * 6)^3: per level, partition sizes times loop
/// orders times parallel-dim choices, over three levels.
inline double space_size_log10(const LayerCode& layer) {
  layer.check();
  double per_level = std::log10(720.0 * 6.0);
  for (Dim d : kAllDims) per_level += std::log10(static_cast<double>(layer.dim(d)));
  return 3.0 * per_level;
}

}  // namespace dcp
