#pragma once

// Attention encoder with three scalar heads, forward and reverse mode by hand.
//
//   z (49) -> linear 512 -> 8 tokens x 64
//   4 x block:  x += drop(attn(ln1(x)));  x += drop(ff(ln2(x)))
//   per head:   block -> ln -> flatten 512 -> swish(linear 96) -> linear 1
//
// Attention is single-head with 1/sqrt(64) scaling; ff is 64 -> 128 -> 64
// with Swish. Rows of every activation matrix are tokens (batch * 8).

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dcp/errors.hpp"
#include "dcp/rng.hpp"
#include "dcp/types.hpp"

namespace dcp::nn {

inline constexpr int kIn = static_cast<int>(kCodeSlots);  // 49
inline constexpr int kTokens = 8;
inline constexpr int kHidden = 64;
inline constexpr int kWide = kTokens * kHidden;  // 512
inline constexpr int kFf = 128;
inline constexpr int kHeadHidden = 96;
inline constexpr int kBlocks = 4;
inline constexpr int kHeads = 3;
inline constexpr double kLnEps = 1e-5;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <class T>
using Col = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return std::size_t(rows) * std::size_t(cols); }
};

struct BlockIdx {
  std::size_t ln1g, ln1b, qkvw, qkvb, ow, ob, ln2g, ln2b, f1w, f1b, f2w, f2b;
};

struct HeadIdx {
  BlockIdx block;
  std::size_t lng, lnb, fcw, fcb, outw, outb;
};

/// Names, shapes and offsets of every parameter tensor, in storage order.
struct Layout {
  std::vector<TensorSpec> tensors;
  std::size_t total = 0;
  std::size_t in_w = 0, in_b = 0;
  std::array<BlockIdx, kBlocks> blocks{};
  std::array<HeadIdx, kHeads> heads{};

  std::size_t add(const std::string& name, int rows, int cols) {
    tensors.push_back({name, rows, cols, total});
    total += std::size_t(rows) * std::size_t(cols);
    return tensors.back().offset;
  }

  BlockIdx add_block(const std::string& p) {
    BlockIdx b;
    b.ln1g = add(p + ".ln1.g", 1, kHidden);
    b.ln1b = add(p + ".ln1.b", 1, kHidden);
    b.qkvw = add(p + ".qkv.w", kHidden, 3 * kHidden);
    b.qkvb = add(p + ".qkv.b", 1, 3 * kHidden);
    b.ow = add(p + ".o.w", kHidden, kHidden);
    b.ob = add(p + ".o.b", 1, kHidden);
    b.ln2g = add(p + ".ln2.g", 1, kHidden);
    b.ln2b = add(p + ".ln2.b", 1, kHidden);
    b.f1w = add(p + ".ff1.w", kHidden, kFf);
    b.f1b = add(p + ".ff1.b", 1, kFf);
    b.f2w = add(p + ".ff2.w", kFf, kHidden);
    b.f2b = add(p + ".ff2.b", 1, kHidden);
    return b;
  }

  static const Layout& get() {
    static const Layout layout = [] {
      Layout l;
      l.in_w = l.add("in.w", kIn, kWide);
      l.in_b = l.add("in.b", 1, kWide);
      for (int b = 0; b < kBlocks; ++b) l.blocks[b] = l.add_block("enc" + std::to_string(b));
      for (int h = 0; h < kHeads; ++h) {
        const std::string p = "head" + std::to_string(h);
        auto& hd = l.heads[h];
        hd.block = l.add_block(p + ".attn");
        hd.lng = l.add(p + ".ln.g", 1, kHidden);
        hd.lnb = l.add(p + ".ln.b", 1, kHidden);
        hd.fcw = l.add(p + ".fc.w", kWide, kHeadHidden);
        hd.fcb = l.add(p + ".fc.b", 1, kHeadHidden);
        hd.outw = l.add(p + ".out.w", kHeadHidden, 1);
        hd.outb = l.add(p + ".out.b", 1, 1);
      }
      return l;
    }();
    return layout;
  }
};

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------

template <class T>
struct LnCache {
  Mat<T> xhat;
  Col<T> rstd;
};

template <class T>
struct BlockCache {
  LnCache<T> ln1, ln2;
  Mat<T> a, qkv, p, o, mask1, b, hpre, hact, mask2;
};

template <class T>
struct HeadCache {
  BlockCache<T> block;
  Mat<T> hb;  // block output
  LnCache<T> ln;
  Mat<T> g, upre, u, mask;
};

template <class T>
struct Cache {
  Mat<T> z, mask;  // mask: dropout on the input projection
  std::array<BlockCache<T>, kBlocks> blocks;
  Mat<T> enc;  // encoder output, (batch * 8) x 64
  std::array<HeadCache<T>, kHeads> heads;
};

/// Parameter storage. Aligned so vectorized reductions round the same way
/// wherever the heap puts the buffer.
template <class T>
using Params = std::vector<T, Eigen::aligned_allocator<T>>;

/// The network on a flat parameter vector of scalar type T.
template <class T>
class Network {
 public:
  using M = Mat<T>;
  using CMap = Eigen::Map<const M>;
  using GMap = Eigen::Map<M>;

  Params<T> w;
  double dropout = 0.1;

  Network() : w(Layout::get().total, T(0)) {}

  static std::size_t param_count() { return Layout::get().total; }

  /// Weights ~ N(0, 1/fan_in), biases 0, layer-norm gains 1.
  void init(std::uint64_t seed) {
    Rng rng = make_rng(derive_seed(seed, {0x1417}));
    for (const auto& t : Layout::get().tensors) {
      const bool gain = t.name.size() > 2 && t.name.compare(t.name.size() - 2, 2, ".g") == 0;
      const bool bias = t.rows == 1 && !gain;
      for (std::size_t i = 0; i < t.size(); ++i) {
        T& v = w[t.offset + i];
        if (gain) {
          v = T(1);
        } else if (bias) {
          v = T(0);
        } else {
          std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(double(t.rows)));
          v = T(n(rng));
        }
      }
    }
  }

  template <class U>
  Network<U> cast() const {
    Network<U> out;
    out.dropout = dropout;
    for (std::size_t i = 0; i < w.size(); ++i) out.w[i] = U(w[i]);
    return out;
  }

  /// z: batch x 49 normalized codes. Returns batch x 3 normalized metrics.
  /// `cache` may be null when no backward pass follows.
  M forward(const M& z, bool train, std::uint64_t dropout_seed, Cache<T>* cache) const {
    if (z.cols() != kIn) throw ShapeMismatch("network input must have 49 columns");
    const auto& L = Layout::get();
    const Eigen::Index batch = z.rows();
    Cache<T> local;
    Cache<T>& c = cache ? *cache : local;
    c.z = z;
    M h(batch, kWide);
    h.noalias() = z * cmat(L.in_w, kIn, kWide);
    h.rowwise() += crow(L.in_b, kWide);
    if (train && dropout > 0) {
      make_mask(c.mask, batch, kWide, derive_seed(dropout_seed, {32}));
      h.array() *= c.mask.array();
    } else {
      c.mask.resize(0, 0);
    }
    M x = Eigen::Map<M>(h.data(), batch * kTokens, kHidden);
    for (int b = 0; b < kBlocks; ++b)
      x = block_forward(L.blocks[b], x, train, derive_seed(dropout_seed, {std::uint64_t(b)}), c.blocks[b]);
    c.enc = x;
    M out(batch, kHeads);
    for (int hd = 0; hd < kHeads; ++hd) {
      const auto& H = L.heads[hd];
      auto& hc = c.heads[hd];
      hc.hb = block_forward(H.block, c.enc, train, derive_seed(dropout_seed, {std::uint64_t(16 + hd)}),
                            hc.block);
      ln_forward(hc.hb, H.lng, H.lnb, hc.ln, hc.g);
      const Eigen::Map<const M> flat(hc.g.data(), batch, kWide);
      hc.upre.noalias() = flat * cmat(H.fcw, kWide, kHeadHidden);
      hc.upre.rowwise() += crow(H.fcb, kHeadHidden);
      hc.u = hc.upre.unaryExpr([](T v) { return v * sigmoid(v); });
      if (train && dropout > 0) {
        make_mask(hc.mask, batch, kHeadHidden, derive_seed(dropout_seed, {std::uint64_t(48 + hd)}));
        hc.u.array() *= hc.mask.array();
      } else {
        hc.mask.resize(0, 0);
      }
      out.col(hd) = (hc.u * cmat(H.outw, kHeadHidden, 1)).array() + w[H.outb];
    }
    if (!cache) c = Cache<T>{};
    return out;
  }

  /// Back-propagates dy (batch x 3). Parameter gradients are accumulated into
  /// `grad` (skipped when null); the input gradient goes to `dz` if non-null.
  void backward(const Cache<T>& c, const M& dy, T* grad, M* dz) const {
    const auto& L = Layout::get();
    const Eigen::Index batch = dy.rows();
    M dx = M::Zero(batch * kTokens, kHidden);
    for (int hd = 0; hd < kHeads; ++hd) {
      const auto& H = L.heads[hd];
      const auto& hc = c.heads[hd];
      const Col<T> dout = dy.col(hd);
      if (grad) {
        gmat(grad, H.outw, kHeadHidden, 1).noalias() += hc.u.transpose() * dout;
        grad[H.outb] += dout.sum();
      }
      M du = dout * cmat(H.outw, kHeadHidden, 1).transpose();
      if (hc.mask.size()) du.array() *= hc.mask.array();
      du.array() *= hc.upre.unaryExpr([](T v) {
        const T s = sigmoid(v);
        return s * (T(1) + v * (T(1) - s));
      }).array();
      const Eigen::Map<const M> flat(hc.g.data(), batch, kWide);
      if (grad) {
        gmat(grad, H.fcw, kWide, kHeadHidden).noalias() += flat.transpose() * du;
        grow(grad, H.fcb, kHeadHidden) += du.colwise().sum();
      }
      M dflat(batch, kWide);
      dflat.noalias() = du * cmat(H.fcw, kWide, kHeadHidden).transpose();
      const Eigen::Map<const M> dg(dflat.data(), batch * kTokens, kHidden);
      M dhb = ln_backward(dg, H.lng, H.lnb, hc.ln, grad);
      dx += block_backward(H.block, dhb, hc.block, grad);
    }
    for (int b = kBlocks - 1; b >= 0; --b) dx = block_backward(L.blocks[b], dx, c.blocks[b], grad);
    Eigen::Map<M> dh(dx.data(), batch, kWide);
    if (c.mask.size()) dh.array() *= c.mask.array();
    if (grad) {
      gmat(grad, L.in_w, kIn, kWide).noalias() += c.z.transpose() * dh;
      grow(grad, L.in_b, kWide) += dh.colwise().sum();
    }
    if (dz) dz->noalias() = dh * cmat(L.in_w, kIn, kWide).transpose();
  }

 private:
  Eigen::Map<const M> cmat(std::size_t off, int r, int c) const { return {w.data() + off, r, c}; }
  Eigen::Map<const RowVec<T>> crow(std::size_t off, int n) const { return {w.data() + off, n}; }
  static Eigen::Map<M> gmat(T* g, std::size_t off, int r, int c) { return {g + off, r, c}; }
  static Eigen::Map<RowVec<T>> grow(T* g, std::size_t off, int n) { return {g + off, n}; }

  void ln_forward(const M& x, std::size_t g, std::size_t b, LnCache<T>& lc, M& y) const {
    const Eigen::Index n = x.rows();
    lc.xhat.resize(n, kHidden);
    lc.rstd.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const T mu = x.row(i).mean();
      const T var = (x.row(i).array() - mu).square().mean();
      const T rs = T(1) / std::sqrt(var + T(kLnEps));
      lc.rstd(i) = rs;
      lc.xhat.row(i) = (x.row(i).array() - mu) * rs;
    }
    y = (lc.xhat.array().rowwise() * crow(g, kHidden).array()).rowwise() + crow(b, kHidden).array();
  }

  template <class D>
  M ln_backward(const Eigen::MatrixBase<D>& dy, std::size_t g, std::size_t b, const LnCache<T>& lc,
                T* grad) const {
    if (grad) {
      grow(grad, g, kHidden).array() += (dy.derived().array() * lc.xhat.array()).colwise().sum();
      grow(grad, b, kHidden) += dy.colwise().sum();
    }
    M dxhat = dy.derived().array().rowwise() * crow(g, kHidden).array();
    M dx(dy.rows(), kHidden);
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
      const T m1 = dxhat.row(i).mean();
      const T m2 = (dxhat.row(i).array() * lc.xhat.row(i).array()).mean();
      dx.row(i) = lc.rstd(i) * (dxhat.row(i).array() - m1 - lc.xhat.row(i).array() * m2);
    }
    return dx;
  }

  void make_mask(M& mask, Eigen::Index rows, int cols, std::uint64_t seed) const {
    Rng rng = make_rng(seed);
    std::bernoulli_distribution keep(1.0 - dropout);
    const T scale = T(1.0 / (1.0 - dropout));
    mask.resize(rows, cols);
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : T(0);
  }

  M block_forward(const BlockIdx& B, const M& x, bool train, std::uint64_t seed, BlockCache<T>& bc) const {
    const Eigen::Index n = x.rows();
    const Eigen::Index batch = n / kTokens;
    ln_forward(x, B.ln1g, B.ln1b, bc.ln1, bc.a);
    bc.qkv.noalias() = bc.a * cmat(B.qkvw, kHidden, 3 * kHidden);
    bc.qkv.rowwise() += crow(B.qkvb, 3 * kHidden);
    bc.p.resize(n, kTokens);
    bc.o.resize(n, kHidden);
    const T scale = T(1) / std::sqrt(T(kHidden));
    using Sq = Eigen::Matrix<T, kTokens, kTokens, Eigen::RowMajor>;
    for (Eigen::Index s = 0; s < batch; ++s) {
      const auto q = bc.qkv.block(s * kTokens, 0, kTokens, kHidden);
      const auto k = bc.qkv.block(s * kTokens, kHidden, kTokens, kHidden);
      const auto v = bc.qkv.block(s * kTokens, 2 * kHidden, kTokens, kHidden);
      Sq sc;
      sc.noalias() = (q * k.transpose()) * scale;
      for (int r = 0; r < kTokens; ++r) {
        const T mx = sc.row(r).maxCoeff();
        sc.row(r) = (sc.row(r).array() - mx).exp();
        sc.row(r) /= sc.row(r).sum();
      }
      bc.p.block(s * kTokens, 0, kTokens, kTokens) = sc;
      bc.o.block(s * kTokens, 0, kTokens, kHidden).noalias() = sc * v;
    }
    M zo(n, kHidden);
    zo.noalias() = bc.o * cmat(B.ow, kHidden, kHidden);
    zo.rowwise() += crow(B.ob, kHidden);
    if (train && dropout > 0) {
      make_mask(bc.mask1, n, kHidden, derive_seed(seed, {1}));
      zo.array() *= bc.mask1.array();
    } else {
      bc.mask1.resize(0, 0);
    }
    M x1 = x + zo;
    ln_forward(x1, B.ln2g, B.ln2b, bc.ln2, bc.b);
    bc.hpre.noalias() = bc.b * cmat(B.f1w, kHidden, kFf);
    bc.hpre.rowwise() += crow(B.f1b, kFf);
    bc.hact = bc.hpre.unaryExpr([](T v) { return v * sigmoid(v); });
    M f(n, kHidden);
    f.noalias() = bc.hact * cmat(B.f2w, kFf, kHidden);
    f.rowwise() += crow(B.f2b, kHidden);
    if (train && dropout > 0) {
      make_mask(bc.mask2, n, kHidden, derive_seed(seed, {2}));
      f.array() *= bc.mask2.array();
    } else {
      bc.mask2.resize(0, 0);
    }
    return x1 + f;
  }

  M block_backward(const BlockIdx& B, const M& dx2, const BlockCache<T>& bc, T* grad) const {
    const Eigen::Index n = dx2.rows();
    const Eigen::Index batch = n / kTokens;
    // Feed-forward branch.
    M df = dx2;
    if (bc.mask2.size()) df.array() *= bc.mask2.array();
    if (grad) {
      gmat(grad, B.f2w, kFf, kHidden).noalias() += bc.hact.transpose() * df;
      grow(grad, B.f2b, kHidden) += df.colwise().sum();
    }
    M dh(n, kFf);
    dh.noalias() = df * cmat(B.f2w, kFf, kHidden).transpose();
    dh.array() *= bc.hpre.unaryExpr([](T v) {
      const T s = sigmoid(v);
      return s * (T(1) + v * (T(1) - s));
    }).array();
    if (grad) {
      gmat(grad, B.f1w, kHidden, kFf).noalias() += bc.b.transpose() * dh;
      grow(grad, B.f1b, kFf) += dh.colwise().sum();
    }
    M db(n, kHidden);
    db.noalias() = dh * cmat(B.f1w, kHidden, kFf).transpose();
    M dx1 = dx2 + ln_backward(db, B.ln2g, B.ln2b, bc.ln2, grad);

    // Attention branch.
    M dzo = dx1;
    if (bc.mask1.size()) dzo.array() *= bc.mask1.array();
    if (grad) {
      gmat(grad, B.ow, kHidden, kHidden).noalias() += bc.o.transpose() * dzo;
      grow(grad, B.ob, kHidden) += dzo.colwise().sum();
    }
    M dout(n, kHidden);
    dout.noalias() = dzo * cmat(B.ow, kHidden, kHidden).transpose();
    M dqkv(n, 3 * kHidden);
    const T scale = T(1) / std::sqrt(T(kHidden));
    using Sq = Eigen::Matrix<T, kTokens, kTokens, Eigen::RowMajor>;
    for (Eigen::Index s = 0; s < batch; ++s) {
      const Eigen::Index r0 = s * kTokens;
      const auto q = bc.qkv.block(r0, 0, kTokens, kHidden);
      const auto k = bc.qkv.block(r0, kHidden, kTokens, kHidden);
      const auto v = bc.qkv.block(r0, 2 * kHidden, kTokens, kHidden);
      const Sq p = bc.p.block(r0, 0, kTokens, kTokens);
      const auto dob = dout.block(r0, 0, kTokens, kHidden);
      Sq dp;
      dp.noalias() = dob * v.transpose();
      dqkv.block(r0, 2 * kHidden, kTokens, kHidden).noalias() = p.transpose() * dob;
      Sq ds = p.array() * (dp.array().colwise() - (dp.array() * p.array()).rowwise().sum());
      ds *= scale;
      dqkv.block(r0, 0, kTokens, kHidden).noalias() = ds * k;
      dqkv.block(r0, kHidden, kTokens, kHidden).noalias() = ds.transpose() * q;
    }
    if (grad) {
      gmat(grad, B.qkvw, kHidden, 3 * kHidden).noalias() += bc.a.transpose() * dqkv;
      grow(grad, B.qkvb, 3 * kHidden) += dqkv.colwise().sum();
    }
    M da(n, kHidden);
    da.noalias() = dqkv * cmat(B.qkvw, kHidden, 3 * kHidden).transpose();
    return dx1 + ln_backward(da, B.ln1g, B.ln1b, bc.ln1, grad);
  }
};

}  // namespace dcp::nn
