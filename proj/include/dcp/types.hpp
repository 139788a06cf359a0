#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "dcp/errors.hpp"

namespace dcp {

// Loop dimensions of a layer. The numeric value is the index used in codes.
enum class Dim : std::uint8_t { K = 0, C = 1, Y = 2, X = 3, R = 4, S = 5 };

inline constexpr std::size_t kNumDims = 6;
inline constexpr std::size_t kNumLevels = 3;  // L2, L1, L0

inline constexpr std::size_t kLayerSlots = 7;
inline constexpr std::size_t kLevelSlots = 2 + 2 * kNumDims;  // 14
inline constexpr std::size_t kDataflowSlots = kNumLevels * kLevelSlots;  // 42
inline constexpr std::size_t kCodeSlots = kLayerSlots + kDataflowSlots;  // 49

inline constexpr std::array<Dim, kNumDims> kAllDims = {Dim::K, Dim::C, Dim::Y,
                                                       Dim::X, Dim::R, Dim::S};

template <class T>
using PerDim = std::array<T, kNumDims>;

constexpr std::size_t idx(Dim d) noexcept { return static_cast<std::size_t>(d); }

constexpr Dim dim_at(std::size_t i) noexcept { return static_cast<Dim>(i); }

constexpr std::string_view dim_name(Dim d) noexcept {
  constexpr std::array<std::string_view, kNumDims> names = {"K", "C", "Y", "X", "R", "S"};
  return names[idx(d)];
}

enum class LayerType : std::uint8_t { Conv = 0, Depthwise = 1, Gemm = 2 };

enum class Level : std::uint8_t { L2 = 0, L1 = 1, L0 = 2 };

constexpr std::string_view level_name(std::size_t l) noexcept {
  constexpr std::array<std::string_view, kNumLevels> names = {"L2", "L1", "L0"};
  return names[l];
}

/// A DNN layer: output/input channels, input rows/cols, filter rows/cols and type.
/// Stride 1 and no padding are assumed, so output rows are Y - R + 1.
struct LayerCode {
  std::int64_t k = 1;
  std::int64_t c = 1;
  std::int64_t y = 1;
  std::int64_t x = 1;
  std::int64_t r = 1;
  std::int64_t s = 1;
  LayerType type = LayerType::Conv;

  constexpr std::int64_t dim(Dim d) const noexcept {
    switch (d) {
      case Dim::K: return k;
      case Dim::C: return c;
      case Dim::Y: return y;
      case Dim::X: return x;
      case Dim::R: return r;
      case Dim::S: return s;
    }
    return 1;
  }

  constexpr PerDim<std::int64_t> dims() const noexcept { return {k, c, y, x, r, s}; }

  std::int64_t out_y() const noexcept { return y - r + 1; }
  std::int64_t out_x() const noexcept { return x - s + 1; }

  /// Empty string when valid, otherwise the first broken invariant.
  std::string problem() const {
    for (Dim d : kAllDims) {
      if (dim(d) < 1) return "dimension " + std::string(dim_name(d)) + " must be >= 1";
    }
    if (r > y) return "R must not exceed Y";
    if (s > x) return "S must not exceed X";
    if (type == LayerType::Depthwise && k != c) return "depthwise layer requires K == C";
    if (type == LayerType::Gemm && (r != 1 || s != 1)) return "GEMM layer requires R == S == 1";
    if (static_cast<int>(type) > 2) return "unknown layer type";
    return {};
  }

  bool valid() const { return problem().empty(); }

  void check() const {
    if (auto p = problem(); !p.empty()) throw InvalidCode("invalid layer: " + p);
  }

  friend constexpr bool operator==(const LayerCode&, const LayerCode&) = default;
};

/// Dataflow of one memory level: spatial unrolling, loop order and tile sizes.
struct LevelDataflow {
  Dim parallel_dim = Dim::K;
  std::int64_t pe_count = 1;
  std::array<Dim, kNumDims> order = kAllDims;  // outermost first
  PerDim<std::int64_t> sizes = {1, 1, 1, 1, 1, 1};

  std::int64_t size(Dim d) const noexcept { return sizes[idx(d)]; }

  friend constexpr bool operator==(const LevelDataflow&, const LevelDataflow&) = default;
};

/// Three levels ordered [L2, L1, L0].
struct DataflowCode {
  std::array<LevelDataflow, kNumLevels> levels{};

  const LevelDataflow& operator[](std::size_t l) const noexcept { return levels[l]; }
  LevelDataflow& operator[](std::size_t l) noexcept { return levels[l]; }

  std::int64_t total_pes() const noexcept {
    return levels[0].pe_count * levels[1].pe_count * levels[2].pe_count;
  }

  /// Every size and PE count 1, canonical K,C,Y,X,R,S order, K parallel.
  static DataflowCode all_ones() { return DataflowCode{}; }

  /// Each level holds the whole layer with one PE.
  static DataflowCode full_tiles(const LayerCode& layer) {
    DataflowCode df;
    for (auto& lv : df.levels) lv.sizes = layer.dims();
    return df;
  }

  friend constexpr bool operator==(const DataflowCode&, const DataflowCode&) = default;
};

/// Accelerator resources and cost constants.
///
/// Buffer capacities are per single cluster buffer of each level. Bandwidths
/// are words per cycle across the DRAM->L2, L2->L1 and L1->L0 boundaries;
/// access energies are nJ per element read from DRAM, L2 and L1 respectively.
struct HwConfig {
  std::string name = "custom";
  std::int64_t pe_total = 168;
  std::int64_t l2_bytes = 64 * 1024;
  std::int64_t l1_bytes = 43 * 1024 / 12;
  std::int64_t l0_bytes = 1024 / 12;
  std::int64_t bytes_per_element = 2;
  std::array<double, kNumLevels> bandwidth = {16.0, 64.0, 256.0};
  std::array<double, kNumLevels> energy_per_access = {200.0, 6.0, 2.0};
  double energy_per_mac = 1.0;
  double clock_hz = 200e6;

  std::int64_t capacity_bytes(std::size_t level) const noexcept {
    return level == 0 ? l2_bytes : level == 1 ? l1_bytes : l0_bytes;
  }

  /// Empty when usable. Buffers must at least hold a 1x1x1 tile of each tensor.
  std::string problem() const {
    if (pe_total < 1) return "pe_total must be positive";
    if (bytes_per_element < 1) return "bytes_per_element must be positive";
    for (std::size_t l = 0; l < kNumLevels; ++l) {
      if (capacity_bytes(l) < 3 * bytes_per_element)
        return std::string(level_name(l)) + " buffer cannot hold a unit tile";
      if (!(bandwidth[l] > 0.0)) return "bandwidths must be positive";
      if (!(energy_per_access[l] > 0.0)) return "access energies must be positive";
    }
    if (!(energy_per_mac > 0.0)) return "energy_per_mac must be positive";
    if (!(clock_hz > 0.0)) return "clock_hz must be positive";
    return {};
  }

  void check() const {
    if (auto p = problem(); !p.empty()) throw ConfigError("hardware profile '" + name + "': " + p);
  }
};

}  // namespace dcp
