#pragma once

#include <algorithm>
#include <array>
#include <cstdint>

#include "dcp/types.hpp"

namespace dcp {

enum class Tensor : std::uint8_t { Input = 0, Weight = 1, Output = 2 };

inline constexpr std::size_t kNumTensors = 3;
inline constexpr std::array<Tensor, kNumTensors> kAllTensors = {Tensor::Input, Tensor::Weight,
                                                                Tensor::Output};

constexpr std::size_t idx(Tensor t) noexcept { return static_cast<std::size_t>(t); }

/// Element counts of one tile of each tensor.
struct Footprint {
  std::int64_t input = 0;
  std::int64_t weight = 0;
  std::int64_t output = 0;

  std::int64_t operator[](Tensor t) const noexcept {
    return t == Tensor::Input ? input : t == Tensor::Weight ? weight : output;
  }
  std::int64_t total() const noexcept { return input + weight + output; }

  friend constexpr bool operator==(const Footprint&, const Footprint&) = default;
};

/// Dimensions that index a tensor. A tile of the tensor changes only when one
/// of these loop coordinates changes.
constexpr bool is_relevant(Tensor t, Dim d, LayerType type) noexcept {
  switch (t) {
    case Tensor::Input: return d == Dim::C || d == Dim::Y || d == Dim::X;
    case Tensor::Output: return d == Dim::K || d == Dim::Y || d == Dim::X;
    case Tensor::Weight:
      if (type == LayerType::Depthwise) return d == Dim::C || d == Dim::R || d == Dim::S;
      return d == Dim::K || d == Dim::C || d == Dim::R || d == Dim::S;
  }
  return false;
}

/// Multiply-accumulate count of a layer (stride 1, no padding).
inline std::int64_t macs(const LayerCode& layer) {
  switch (layer.type) {
    case LayerType::Conv:
      return layer.k * layer.c * layer.out_y() * layer.out_x() * layer.r * layer.s;
    case LayerType::Depthwise:
      return layer.c * layer.out_y() * layer.out_x() * layer.r * layer.s;
    case LayerType::Gemm:
      return layer.k * layer.c * layer.y * layer.x;
  }
  return 0;
}

/// Tile sizes of each tensor. Input halos from the sliding window are ignored.
inline Footprint tile_footprint(const PerDim<std::int64_t>& sizes, const LayerCode& layer) {
  const auto at = [&](Dim d) { return sizes[idx(d)]; };
  Footprint f;
  f.weight = layer.type == LayerType::Depthwise
                 ? at(Dim::C) * at(Dim::R) * at(Dim::S)
                 : at(Dim::K) * at(Dim::C) * at(Dim::R) * at(Dim::S);
  f.input = at(Dim::C) * at(Dim::Y) * at(Dim::X);
  f.output = at(Dim::K) * std::max<std::int64_t>(at(Dim::Y) - at(Dim::R) + 1, 1) *
             std::max<std::int64_t>(at(Dim::X) - at(Dim::S) + 1, 1);
  return f;
}

}  // namespace dcp
