#pragma once

// Space-time transformation (STT) of a loop nest: [p, t] = STT * x maps an
// iteration x to PE coordinates p (all rows but the last) and a timestep t.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dcp/errors.hpp"

namespace dcp {

using i128 = __int128;

struct SttMatrix {
  std::vector<std::vector<std::int64_t>> rows;  // last row is time

  SttMatrix() = default;
  explicit SttMatrix(std::vector<std::vector<std::int64_t>> r) : rows(std::move(r)) { check(); }

  std::size_t out_dims() const { return rows.size(); }
  std::size_t spatial_dims() const { return rows.size() - 1; }
  std::size_t loop_dims() const { return rows.empty() ? 0 : rows.front().size(); }
  bool square() const { return out_dims() == loop_dims(); }

  void check() const {
    if (rows.size() < 2) throw ShapeMismatch("STT needs at least one spatial row and a time row");
    if (rows.front().empty()) throw ShapeMismatch("STT needs at least one loop dim");
    for (const auto& r : rows)
      if (r.size() != rows.front().size()) throw ShapeMismatch("STT rows differ in length");
  }

  static SttMatrix identity(std::size_t n) {
    std::vector<std::vector<std::int64_t>> r(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
    return SttMatrix(std::move(r));
  }

  /// "1,0,0;0,1,0;0,0,1"
  static SttMatrix parse(std::string_view text);
};

using IntrinsicSize = std::vector<std::int64_t>;

namespace detail {

inline std::int64_t narrow(i128 v) {
  if (v > i128(INT64_MAX) || v < i128(INT64_MIN)) throw Overflow("STT value exceeds 64 bits");
  return std::int64_t(v);
}

inline i128 mul(i128 a, i128 b) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw Overflow("128-bit product overflow");
  return r;
}

inline i128 add(i128 a, i128 b) {
  i128 r;
  if (__builtin_add_overflow(a, b, &r)) throw Overflow("128-bit sum overflow");
  return r;
}

inline i128 sub(i128 a, i128 b) {
  i128 r;
  if (__builtin_sub_overflow(a, b, &r)) throw Overflow("128-bit difference overflow");
  return r;
}

inline std::vector<std::int64_t> parse_ints(std::string_view s) {
  std::vector<std::int64_t> out;
  std::string item;
  std::stringstream ss{std::string(s)};
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw ShapeMismatch("not an integer: '" + item + "'");
    }
    while (pos < item.size() && item[pos] == ' ') ++pos;
    if (pos != item.size()) throw ShapeMismatch("not an integer: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

inline SttMatrix SttMatrix::parse(std::string_view text) {
  std::vector<std::vector<std::int64_t>> r;
  std::string row;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, row, ';')) r.push_back(detail::parse_ints(row));
  return SttMatrix(std::move(r));
}

inline IntrinsicSize parse_intrinsic(std::string_view text) {
  IntrinsicSize n = detail::parse_ints(text);
  if (n.empty()) throw ShapeMismatch("empty intrinsic size");
  return n;
}

inline void check_intrinsic(const SttMatrix& stt, const IntrinsicSize& n) {
  stt.check();
  if (n.size() != stt.loop_dims()) throw ShapeMismatch("intrinsic size does not match STT columns");
  for (auto v : n)
    if (v < 1) throw ShapeMismatch("intrinsic sizes must be >= 1");
}

struct SpaceTime {
  std::vector<std::int64_t> p;
  std::int64_t t = 0;

  friend bool operator==(const SpaceTime&, const SpaceTime&) = default;
};

/// Full image STT * x, spatial rows then time.
inline std::vector<std::int64_t> image(const SttMatrix& stt, const std::vector<std::int64_t>& x) {
  if (x.size() != stt.loop_dims()) throw ShapeMismatch("iteration vector does not match STT columns");
  std::vector<std::int64_t> out(stt.out_dims());
  for (std::size_t r = 0; r < stt.out_dims(); ++r) {
    i128 acc = 0;
    for (std::size_t d = 0; d < x.size(); ++d) acc = detail::add(acc, detail::mul(stt.rows[r][d], x[d]));
    out[r] = detail::narrow(acc);
  }
  return out;
}

inline SpaceTime apply_stt(const SttMatrix& stt, const std::vector<std::int64_t>& x) {
  stt.check();
  auto v = image(stt, x);
  SpaceTime st;
  st.t = v.back();
  v.pop_back();
  st.p = std::move(v);
  return st;
}

struct SttBounds {
  std::vector<std::pair<std::int64_t, std::int64_t>> rows;  // (min, max) per output row
  std::vector<std::int64_t> pe_shape;                       // extent of each spatial row
  std::int64_t pe_count = 1;
  std::int64_t time_span = 1;
};

inline SttBounds bounds(const SttMatrix& stt, const IntrinsicSize& n) {
  check_intrinsic(stt, n);
  SttBounds b;
  i128 pes = 1;
  for (std::size_t r = 0; r < stt.out_dims(); ++r) {
    i128 lo = 0, hi = 0;
    for (std::size_t d = 0; d < n.size(); ++d) {
      const i128 v = detail::mul(stt.rows[r][d], n[d] - 1);
      (v < 0 ? lo : hi) = detail::add(v < 0 ? lo : hi, v);
    }
    const std::int64_t mn = detail::narrow(lo), mx = detail::narrow(hi);
    b.rows.emplace_back(mn, mx);
    const std::int64_t extent = detail::narrow(i128(mx) - i128(mn) + 1);
    if (r + 1 < stt.out_dims()) {
      b.pe_shape.push_back(extent);
      pes = detail::mul(pes, extent);
    } else {
      b.time_span = extent;
    }
  }
  b.pe_count = detail::narrow(pes);
  return b;
}

/// Determinant by fraction-free elimination, exact in 128 bits.
inline i128 determinant(const SttMatrix& stt) {
  stt.check();
  if (!stt.square()) throw ShapeMismatch("determinant needs a square STT");
  const std::size_t n = stt.out_dims();
  std::vector<std::vector<i128>> a(n, std::vector<i128>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = stt.rows[i][j];
  int sign = 1;
  i128 prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t s = k + 1;
      while (s < n && a[s][k] == 0) ++s;
      if (s == n) return 0;
      std::swap(a[k], a[s]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a[i][j] = detail::sub(detail::mul(a[i][j], a[k][k]), detail::mul(a[i][k], a[k][j])) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

inline constexpr std::int64_t kMaxEnumeration = 10'000'000;

struct ConflictReport {
  bool conflict_free = true;
  std::string method;  // "determinant" or "enumeration"
  // First colliding pair in row-major order of the box (last dim fastest).
  std::optional<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> witness;
};

inline std::int64_t lattice_points(const IntrinsicSize& n) {
  i128 total = 1;
  for (auto v : n) {
    total = detail::mul(total, v);
    if (total > i128(INT64_MAX)) return INT64_MAX;
  }
  return std::int64_t(total);
}

/// Exhaustive injectivity check over the iteration box.
inline ConflictReport enumerate_conflicts(const SttMatrix& stt, const IntrinsicSize& n) {
  check_intrinsic(stt, n);
  const std::int64_t total = lattice_points(n);
  if (total > kMaxEnumeration) throw TooLarge("iteration box has more than 1e7 points");
  struct Hash {
    std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
      std::size_t h = 0xcbf29ce484222325ull;
      for (auto x : v) h = (h ^ std::size_t(x)) * 0x100000001b3ull;
      return h;
    }
  };
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::int64_t>, Hash> seen;
  seen.reserve(std::size_t(total));
  ConflictReport rep;
  rep.method = "enumeration";
  std::vector<std::int64_t> x(n.size(), 0);
  for (std::int64_t i = 0; i < total; ++i) {
    auto [it, fresh] = seen.emplace(image(stt, x), x);
    if (!fresh) {
      rep.conflict_free = false;
      rep.witness = std::make_pair(it->second, x);
      return rep;
    }
    for (std::size_t d = n.size(); d-- > 0;) {
      if (++x[d] < n[d]) break;
      x[d] = 0;
    }
  }
  return rep;
}

/// A square STT with nonzero determinant is injective everywhere; other
/// cases fall back to enumeration when the box is small enough.
inline ConflictReport check_conflict_free(const SttMatrix& stt, const IntrinsicSize& n) {
  check_intrinsic(stt, n);
  if (stt.square() && determinant(stt) != 0) return {true, "determinant", std::nullopt};
  return enumerate_conflicts(stt, n);
}

}  // namespace dcp
