#include <gtest/gtest.h>

#include <random>

#include "dcp/rng.hpp"
#include "dcp/sttmap.hpp"

namespace dcp {
namespace {

using V = std::vector<std::int64_t>;

SttMatrix random_stt(Rng& rng, std::size_t rows, std::size_t cols, int lim) {
  std::uniform_int_distribution<int> e(-lim, lim);
  std::vector<V> r(rows, V(cols));
  for (auto& row : r)
    for (auto& v : row) v = e(rng);
  return SttMatrix(r);
}

// Independent brute force over the box.
std::vector<V> all_points(const IntrinsicSize& n) {
  std::vector<V> pts{V{}};
  for (auto nd : n) {
    std::vector<V> next;
    for (const auto& p : pts)
      for (std::int64_t i = 0; i < nd; ++i) {
        V q = p;
        q.push_back(i);
        next.push_back(q);
      }
    pts = next;
  }
  return pts;
}

bool brute_injective(const SttMatrix& stt, const IntrinsicSize& n) {
  const auto pts = all_points(n);
  std::vector<V> imgs;
  for (const auto& p : pts) {
    V img(stt.out_dims(), 0);
    for (std::size_t r = 0; r < stt.out_dims(); ++r)
      for (std::size_t d = 0; d < p.size(); ++d) img[r] += stt.rows[r][d] * p[d];
    imgs.push_back(img);
  }
  std::sort(imgs.begin(), imgs.end());
  return std::adjacent_find(imgs.begin(), imgs.end()) == imgs.end();
}

TEST(Stt, ApplyExamples) {
  const auto id = apply_stt(SttMatrix::identity(3), {2, 3, 1});
  EXPECT_EQ(id.p, (V{2, 3}));
  EXPECT_EQ(id.t, 1);
  const auto st = apply_stt(SttMatrix({{1, 0, 0}, {0, 0, 1}, {0, 1, 0}}), {1, 2, 3});
  EXPECT_EQ(st.p, (V{1, 3}));
  EXPECT_EQ(st.t, 2);
  const SttMatrix zero({{0, 0}, {0, 0}});
  EXPECT_EQ(apply_stt(zero, {7, -3}).p, (V{0}));
  EXPECT_EQ(apply_stt(zero, {7, -3}).t, 0);
  EXPECT_THROW(apply_stt(SttMatrix::identity(3), {1, 2}), ShapeMismatch);
}

TEST(Stt, ApplyIsLinear) {
  Rng rng = make_rng(1);
  std::uniform_int_distribution<int> e(-20, 20);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_stt(rng, 3, 4, 5);
    V a(4), b(4), c(4);
    for (int d = 0; d < 4; ++d) {
      a[d] = e(rng);
      b[d] = e(rng);
      c[d] = a[d] + b[d];
    }
    const auto sa = apply_stt(s, a), sb = apply_stt(s, b), sc = apply_stt(s, c);
    for (std::size_t r = 0; r < sa.p.size(); ++r) EXPECT_EQ(sc.p[r], sa.p[r] + sb.p[r]);
    EXPECT_EQ(sc.t, sa.t + sb.t);
  }
}

TEST(Stt, BoundsExamples) {
  const auto b = bounds(SttMatrix::identity(3), {4, 4, 4});
  for (const auto& r : b.rows) EXPECT_EQ(r, (std::pair<std::int64_t, std::int64_t>{0, 3}));
  EXPECT_EQ(b.pe_shape, (V{4, 4}));
  EXPECT_EQ(b.time_span, 4);
  EXPECT_EQ(b.pe_count, 16);
  const auto m = bounds(SttMatrix({{1, -1, 0}, {0, 0, 0}}), {4, 4, 4});
  EXPECT_EQ(m.rows[0], (std::pair<std::int64_t, std::int64_t>{-3, 3}));
  EXPECT_EQ(m.rows[1], (std::pair<std::int64_t, std::int64_t>{0, 0}));
  EXPECT_THROW(bounds(SttMatrix::identity(3), {4, 4}), ShapeMismatch);
  EXPECT_THROW(bounds(SttMatrix::identity(2), {4, 0}), ShapeMismatch);
}

TEST(Stt, BoundsMatchBruteForce) {
  Rng rng = make_rng(2);
  std::uniform_int_distribution<int> nd(1, 5);
  for (int i = 0; i < 300; ++i) {
    const auto s = random_stt(rng, 3, 4, 4);
    IntrinsicSize n(4);
    for (auto& v : n) v = nd(rng);
    const auto b = bounds(s, n);
    for (std::size_t r = 0; r < 3; ++r) {
      std::int64_t lo = INT64_MAX, hi = INT64_MIN;
      for (const auto& p : all_points(n)) {
        std::int64_t v = 0;
        for (std::size_t d = 0; d < 4; ++d) v += s.rows[r][d] * p[d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      ASSERT_EQ(b.rows[r].first, lo);
      ASSERT_EQ(b.rows[r].second, hi);
    }
  }
}

TEST(Stt, ConflictExamples) {
  const auto id = check_conflict_free(SttMatrix::identity(3), {4, 4, 4});
  EXPECT_TRUE(id.conflict_free);
  EXPECT_EQ(id.method, "determinant");
  // Duplicated rows: (i + j) twice, rank 1 on a 2-d box.
  const auto dup = check_conflict_free(SttMatrix({{1, 1}, {1, 1}}), {2, 2});
  EXPECT_FALSE(dup.conflict_free);
  ASSERT_TRUE(dup.witness.has_value());
  EXPECT_EQ(dup.witness->first, (V{0, 1}));
  EXPECT_EQ(dup.witness->second, (V{1, 0}));
  // Output stationary matrix multiply: p = (i, j), t = k.
  EXPECT_TRUE(check_conflict_free(SttMatrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), {2, 2, 2}).conflict_free);
  // Singular but the kernel vector (3, -1) does not fit in a 2x2 box.
  const auto fits = check_conflict_free(SttMatrix({{1, 3}, {2, 6}}), {2, 2});
  EXPECT_TRUE(fits.conflict_free);
  EXPECT_EQ(fits.method, "enumeration");
  EXPECT_FALSE(check_conflict_free(SttMatrix({{1, 3}, {2, 6}}), {4, 2}).conflict_free);
}

TEST(Stt, DeterminantMatchesEnumeration) {
  Rng rng = make_rng(3);
  std::uniform_int_distribution<int> nd(1, 5), sz(2, 4);
  int singular = 0;
  for (int i = 0; i < 400; ++i) {
    const std::size_t k = std::size_t(sz(rng));
    const auto s = random_stt(rng, k, k, 2);
    IntrinsicSize n(k);
    for (auto& v : n) v = nd(rng);
    const bool brute = brute_injective(s, n);
    EXPECT_EQ(check_conflict_free(s, n).conflict_free, brute);
    EXPECT_EQ(enumerate_conflicts(s, n).conflict_free, brute);
    if (determinant(s) != 0) EXPECT_TRUE(brute);
    singular += determinant(s) == 0;
  }
  EXPECT_GT(singular, 10);
}

TEST(Stt, DeterminantValues) {
  EXPECT_TRUE(determinant(SttMatrix::identity(4)) == 1);
  EXPECT_TRUE(determinant(SttMatrix({{0, 1}, {1, 0}})) == -1);
  EXPECT_TRUE(determinant(SttMatrix({{2, 0, 1}, {1, 3, 2}, {1, 1, 2}})) == 6);
  EXPECT_TRUE(determinant(SttMatrix({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}})) == 0);
  EXPECT_THROW(determinant(SttMatrix({{1, 0, 0}, {0, 1, 0}})), ShapeMismatch);
}

TEST(Stt, NonSquareAndTooLarge) {
  // 2 outputs for 3 loops: rank at most 2, so some box collides.
  EXPECT_FALSE(check_conflict_free(SttMatrix({{1, 0, 0}, {0, 1, 1}}), {2, 2, 2}).conflict_free);
  EXPECT_TRUE(check_conflict_free(SttMatrix({{1, 0, 0}, {0, 1, 4}}), {3, 4, 2}).conflict_free);
  EXPECT_THROW(check_conflict_free(SttMatrix({{1, 0, 0}, {0, 1, 4}}), {1000, 1000, 1000}), TooLarge);
  EXPECT_TRUE(check_conflict_free(SttMatrix::identity(3), {1000, 1000, 1000}).conflict_free);
}

TEST(Stt, OverflowIsReported) {
  const std::int64_t big = INT64_MAX / 2;
  EXPECT_THROW(apply_stt(SttMatrix({{big, big}, {1, 1}}), {2, 2}), Overflow);
  EXPECT_THROW(bounds(SttMatrix({{big, big}, {1, 1}}), {4, 4}), Overflow);
}

TEST(Stt, Parse) {
  const auto s = SttMatrix::parse("1,0,0;0,1,0;0,0,1");
  EXPECT_EQ(s.rows, SttMatrix::identity(3).rows);
  EXPECT_EQ(parse_intrinsic("4,4,4"), (IntrinsicSize{4, 4, 4}));
  EXPECT_EQ(SttMatrix::parse("1,-1;2, 3").rows[1], (V{2, 3}));
  EXPECT_THROW(SttMatrix::parse("1,0;0"), ShapeMismatch);
  EXPECT_THROW(SttMatrix::parse("1,x;0,1"), ShapeMismatch);
  EXPECT_THROW(SttMatrix::parse("1,0,0"), ShapeMismatch);
}

}  // namespace
}  // namespace dcp
