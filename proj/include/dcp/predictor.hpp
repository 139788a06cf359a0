#pragma once

// Surrogate predictor: input/metric normalization, log-cosh training with
// Adam, input gradients for propagation, and a binary checkpoint format.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcp/benchgen.hpp"
#include "dcp/codespace.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/errors.hpp"
#include "dcp/io.hpp"
#include "dcp/nn.hpp"
#include "dcp/rng.hpp"

namespace dcp {

inline constexpr std::size_t kNumHeads = 3;  // latency, energy, power
using HeadVector = std::array<double, kNumHeads>;
using CodeVector = std::array<double, kCodeSlots>;
using MatX = nn::Mat<double>;

inline Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

/// log(cosh(p - t)) in a form that does not overflow for large |p - t|.
inline double logcosh(double pred, double target) {
  const double d = std::fabs(pred - target);
  return d + std::log1p(std::exp(-2.0 * d)) - std::log(2.0);
}

inline double logcosh_grad(double pred, double target) { return std::tanh(pred - target); }

/// True for slots holding counts (layer dims, PE counts, tile sizes), which
/// are normalized in log10 space; false for categorical slots.
inline bool is_count_slot(std::size_t slot) {
  if (slot < kLayerSlots) return slot < 6;
  const std::size_t off = (slot - kLayerSlots) % kLevelSlots;
  return off == 1 || (off >= 3 && off % 2 == 1);
}

inline HeadVector head_values(const MetricVector& m) { return {m.latency, m.energy, m.power}; }

/// Per-slot and per-metric z-scores; counts and metrics in log10 space.
struct Normalizer {
  CodeVector in_mean{};
  CodeVector in_std{};
  HeadVector out_mean{};
  HeadVector out_std{};
  bool fitted = false;

  static double slot_value(std::size_t slot, double v) { return is_count_slot(slot) ? std::log10(v) : v; }

  static Normalizer fit(std::span<const DatasetRecord> records) {
    if (records.empty()) throw DegenerateData("no records to fit normalization");
    Normalizer n;
    std::array<double, kCodeSlots> s1{}, s2{};
    std::array<double, kNumHeads> m1{}, m2{};
    for (const auto& r : records) {
      const FlatCode code = encode(r.layer, r.dataflow);
      for (std::size_t i = 0; i < kCodeSlots; ++i) {
        const double v = slot_value(i, code.values[i]);
        s1[i] += v;
        s2[i] += v * v;
      }
      const HeadVector h = head_values(r.metrics);
      for (std::size_t k = 0; k < kNumHeads; ++k) {
        if (!(h[k] > 0) || !std::isfinite(h[k])) throw DegenerateData("metrics must be positive and finite");
        const double v = std::log10(h[k]);
        m1[k] += v;
        m2[k] += v * v;
      }
    }
    const double count = double(records.size());
    for (std::size_t i = 0; i < kCodeSlots; ++i) {
      n.in_mean[i] = s1[i] / count;
      const double var = std::max(s2[i] / count - n.in_mean[i] * n.in_mean[i], 0.0);
      n.in_std[i] = var > 1e-12 ? std::sqrt(var) : 1.0;
    }
    for (std::size_t k = 0; k < kNumHeads; ++k) {
      n.out_mean[k] = m1[k] / count;
      const double var = std::max(m2[k] / count - n.out_mean[k] * n.out_mean[k], 0.0);
      if (var <= 1e-20) throw DegenerateData(std::string("metric '") + kMetricNames[k] + "' is constant");
      n.out_std[k] = std::sqrt(var);
    }
    n.fitted = true;
    return n;
  }

  CodeVector normalize(const FlatCode& code) const {
    CodeVector z;
    for (std::size_t i = 0; i < kCodeSlots; ++i)
      z[i] = (slot_value(i, code.values[i]) - in_mean[i]) / in_std[i];
    return z;
  }

  /// Inverse of normalize for real-valued (not yet projected) codes.
  double denormalize_slot(std::size_t i, double z) const {
    const double v = z * in_std[i] + in_mean[i];
    return is_count_slot(i) ? std::pow(10.0, v) : v;
  }

  double normalize_slot(std::size_t i, double v) const { return (slot_value(i, v) - in_mean[i]) / in_std[i]; }

  HeadVector normalize_metrics(const HeadVector& m) const {
    HeadVector out;
    for (std::size_t k = 0; k < kNumHeads; ++k) out[k] = (std::log10(m[k]) - out_mean[k]) / out_std[k];
    return out;
  }

  HeadVector denormalize_metrics(const HeadVector& z) const {
    HeadVector out;
    for (std::size_t k = 0; k < kNumHeads; ++k) out[k] = std::pow(10.0, z[k] * out_std[k] + out_mean[k]);
    return out;
  }
};

struct TrainConfig {
  int epochs = 50;
  double lr = 1e-2;
  double weight_decay = 1e-7;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-3;
  double val_fraction = 0.2;
  std::size_t batch = 256;
  double dropout = 0.1;
  bool cosine = true;
  std::uint64_t seed = 0;

  static TrainConfig finetune_defaults() {
    TrainConfig c;
    c.epochs = 10;
    c.lr = 1e-3;
    return c;
  }

  json to_json() const {
    return json{{"epochs", epochs}, {"lr", lr}, {"weight_decay", weight_decay}, {"beta1", beta1},
                {"beta2", beta2}, {"eps", eps}, {"val_fraction", val_fraction}, {"batch", batch},
                {"dropout", dropout}, {"cosine", cosine}, {"seed", seed}};
  }
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::size_t train_records = 0;
  std::size_t val_records = 0;

  json to_json() const {
    json e = json::array();
    for (const auto& x : epochs)
      e.push_back({{"epoch", x.epoch}, {"train_loss", x.train_loss}, {"val_loss", x.val_loss}, {"lr", x.lr}});
    return json{{"epochs", e}, {"best_epoch", best_epoch}, {"best_val_loss", best_val_loss},
                {"train_records", train_records}, {"val_records", val_records}};
  }
};

/// Deterministic 80/20 style split: a seeded shuffle, first part trains.
struct Split {
  std::vector<std::size_t> train, val;
};

inline Split split_indices(std::size_t n, double val_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(derive_seed(seed, {0x5171}));
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(double(n) * val_fraction));
  Split s;
  s.val.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  return s;
}

/// Gradient of sum_i lambda_i * logcosh(f_i(z), f_i(z) - 1) with respect to
/// z, for a network of any precision.
template <class T>
nn::Mat<T> descent_grad(const nn::Network<T>& net, const nn::Mat<T>& z, const HeadVector& lambdas,
                        nn::Mat<T>* preds = nullptr) {
  if (z.cols() != nn::kIn) throw ShapeMismatch("descent_grad: bad shapes");
  nn::Cache<T> cache;
  const nn::Mat<T> out = net.forward(z, false, 0, &cache);
  nn::Mat<T> dy(out.rows(), ix(kNumHeads));
  const T g1 = T(std::tanh(1.0));
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (std::size_t k = 0; k < kNumHeads; ++k) dy(r, ix(k)) = T(lambdas[k]) * g1;
  nn::Mat<T> dz(z.rows(), nn::kIn);
  net.backward(cache, dy, nullptr, &dz);
  if (preds) *preds = out;
  return dz;
}

class Predictor {
 public:
  nn::Network<double> net;
  Normalizer norm;
  json meta = json::object();

  Predictor() = default;

  explicit Predictor(std::uint64_t init_seed) { net.init(init_seed); }

  bool trained() const { return norm.fitted; }

  void require_trained() const {
    if (!norm.fitted) throw UntrainedPredictor("predictor has no normalization statistics");
  }

  CodeVector normalize(const LayerCode& layer, const DataflowCode& df) const {
    require_trained();
    return norm.normalize(encode(layer, df));
  }

  /// Normalized head outputs for a batch of normalized codes.
  MatX forward(const MatX& z) const {
    constexpr Eigen::Index kChunk = 2048;  // bounds activation memory
    if (z.rows() <= kChunk) return net.forward(z, false, 0, nullptr);
    MatX out(z.rows(), ix(kNumHeads));
    for (Eigen::Index r = 0; r < z.rows(); r += kChunk) {
      const Eigen::Index n = std::min(kChunk, z.rows() - r);
      out.middleRows(r, n) = net.forward(z.middleRows(r, n), false, 0, nullptr);
    }
    return out;
  }

  HeadVector forward(const CodeVector& z) const {
    const MatX in = Eigen::Map<const MatX>(z.data(), 1, nn::kIn);
    const MatX out = forward(in);
    return {out(0, 0), out(0, 1), out(0, 2)};
  }

  /// Predicted metrics in physical units; edp = latency * energy.
  MetricVector predict(const LayerCode& layer, const DataflowCode& df) const {
    const HeadVector m = norm.denormalize_metrics(forward(normalize(layer, df)));
    MetricVector out;
    out.latency = m[0];
    out.energy = m[1];
    out.power = m[2];
    out.edp = m[0] * m[1];
    return out;
  }

  /// Gradient of sum_i lambda_i * logcosh(f_i(z), target_i) with respect to
  /// z (normalized space), dropout off. Rows of z/targets are independent.
  MatX input_grad(const MatX& z, const MatX& targets, const HeadVector& lambdas, MatX* preds = nullptr) const {
    if (z.cols() != nn::kIn || targets.rows() != z.rows() || targets.cols() != ix(kNumHeads))
      throw ShapeMismatch("input_grad: bad shapes");
    nn::Cache<double> cache;
    const MatX out = net.forward(z, false, 0, &cache);
    MatX dy(out.rows(), kNumHeads);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (std::size_t k = 0; k < kNumHeads; ++k) dy(r, ix(k)) = lambdas[k] * logcosh_grad(out(r, ix(k)), targets(r, ix(k)));
    MatX dz(z.rows(), nn::kIn);
    net.backward(cache, dy, nullptr, &dz);
    if (preds) *preds = out;
    return dz;
  }

  /// input_grad with the moving target R' = P - 1 for every head, so each
  /// head contributes lambda_i * tanh(1) times its own gradient.
  MatX descent_grad(const MatX& z, const HeadVector& lambdas, MatX* preds = nullptr) const {
    return dcp::descent_grad(net, z, lambdas, preds);
  }

  CodeVector input_grad(const CodeVector& z, const HeadVector& targets, const HeadVector& lambdas) const {
    const MatX zi = Eigen::Map<const MatX>(z.data(), 1, nn::kIn);
    const MatX ti = Eigen::Map<const MatX>(targets.data(), 1, ix(kNumHeads));
    const MatX g = input_grad(zi, ti, lambdas);
    CodeVector out;
    for (std::size_t i = 0; i < kCodeSlots; ++i) out[i] = g(0, ix(i));
    return out;
  }

  /// Mean over rows of the summed log-cosh loss of the three heads.
  double loss(const MatX& z, const MatX& y) const {
    const MatX out = forward(z);
    double s = 0.0;
    for (Eigen::Index i = 0; i < out.size(); ++i) s += logcosh(out.data()[i], y.data()[i]);
    return out.rows() ? s / double(out.rows()) : 0.0;
  }
};

// ---------------------------------------------------------------------------
// Training

/// Normalized inputs and targets of a record subset.
inline std::pair<MatX, MatX> design_matrix(const Normalizer& norm, std::span<const DatasetRecord> records,
                                           std::span<const std::size_t> rows) {
  MatX z(ix(rows.size()), nn::kIn), y(ix(rows.size()), ix(kNumHeads));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& rec = records[rows[r]];
    const CodeVector zi = norm.normalize(encode(rec.layer, rec.dataflow));
    for (std::size_t i = 0; i < kCodeSlots; ++i) z(ix(r), ix(i)) = zi[i];
    const HeadVector yi = norm.normalize_metrics(head_values(rec.metrics));
    for (std::size_t k = 0; k < kNumHeads; ++k) y(ix(r), ix(k)) = yi[k];
  }
  return {std::move(z), std::move(y)};
}

namespace detail {

struct Adam {
  std::vector<double> m, v;
  std::uint64_t t = 0;

  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(nn::Params<double>& w, const nn::Params<double>& g, const TrainConfig& cfg, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(cfg.beta1, double(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(t));
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + cfg.weight_decay * w[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Runs cfg.epochs epochs from the current parameters and leaves the best
/// epoch (by validation loss) in `p`. Epoch 0 (the start point) only counts
/// when `include_start` is set.
inline TrainLog fit(Predictor& p, const MatX& zt, const MatX& yt, const MatX& zv, const MatX& yv,
                    const TrainConfig& cfg, bool include_start, const EpochCallback& on_epoch) {
  TrainLog log;
  log.train_records = std::size_t(zt.rows());
  log.val_records = std::size_t(zv.rows());
  const bool has_val = zv.rows() > 0;
  const auto val_loss = [&] { return has_val ? p.loss(zv, yv) : p.loss(zt, yt); };
  p.net.dropout = cfg.dropout;

  nn::Params<double> best = p.net.w;
  log.best_val_loss = include_start ? val_loss() : std::numeric_limits<double>::infinity();
  log.best_epoch = 0;

  const std::size_t n = std::size_t(zt.rows());
  const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch, n));
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const double total_steps = double(steps_per_epoch) * double(std::max(cfg.epochs, 1));
  detail::Adam opt(p.net.w.size());
  nn::Params<double> grad(p.net.w.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  nn::Cache<double> cache;
  std::uint64_t step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng = make_rng(derive_seed(cfg.seed, {0xE90C, std::uint64_t(epoch)}));
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    double lr = cfg.lr;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t b = std::min(batch, n - start);
      MatX zb(ix(b), nn::kIn), yb(ix(b), ix(kNumHeads));
      for (std::size_t r = 0; r < b; ++r) {
        zb.row(ix(r)) = zt.row(ix(order[start + r]));
        yb.row(ix(r)) = yt.row(ix(order[start + r]));
      }
      const MatX out = p.net.forward(zb, true, derive_seed(cfg.seed, {0xD809, step}), &cache);
      MatX dy(ix(b), ix(kNumHeads));
      for (Eigen::Index i = 0; i < out.size(); ++i) {
        sum += logcosh(out.data()[i], yb.data()[i]);
        dy.data()[i] = logcosh_grad(out.data()[i], yb.data()[i]) / double(b);
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      p.net.backward(cache, dy, grad.data(), nullptr);
      lr = cfg.cosine ? cfg.lr * 0.5 * (1.0 + std::cos(M_PI * double(step) / total_steps)) : cfg.lr;
      opt.step(p.net.w, grad, cfg, lr);
      ++step;
    }
    EpochLog e;
    e.epoch = epoch;
    e.train_loss = sum / double(n);
    e.val_loss = val_loss();
    e.lr = lr;
    log.epochs.push_back(e);
    if (e.val_loss < log.best_val_loss || !std::isfinite(log.best_val_loss)) {
      log.best_val_loss = e.val_loss;
      log.best_epoch = epoch;
      best = p.net.w;
    }
    if (on_epoch) on_epoch(e);
  }
  p.net.w = best;
  return log;
}

}  // namespace detail

struct TrainResult {
  Predictor predictor;
  TrainLog log;
  Split split;
};

/// Fits normalization on the training part and trains a fresh network.
inline TrainResult train(std::span<const DatasetRecord> records, const TrainConfig& cfg,
                         const detail::EpochCallback& on_epoch = {}) {
  if (records.size() < 100) throw DegenerateData("training needs at least 100 records");
  TrainResult res;
  res.split = split_indices(records.size(), cfg.val_fraction, cfg.seed);
  std::vector<DatasetRecord> train_part;
  train_part.reserve(res.split.train.size());
  for (auto i : res.split.train) train_part.push_back(records[i]);
  // Degenerate metrics are judged on the whole set, then stats come from the
  // training part.
  Normalizer::fit(records);
  Predictor p(cfg.seed);
  p.norm = Normalizer::fit(train_part);
  const auto [zt, yt] = design_matrix(p.norm, records, res.split.train);
  const auto [zv, yv] = design_matrix(p.norm, records, res.split.val);
  res.log = detail::fit(p, zt, yt, zv, yv, cfg, false, on_epoch);
  p.meta["train"] = cfg.to_json();
  p.meta["records"] = records.size();
  if (!records.empty()) p.meta["hw"] = records.front().hw_profile;
  res.predictor = std::move(p);
  return res;
}

/// Continues training with fresh optimizer state and unchanged normalization.
inline TrainResult finetune(const Predictor& base, std::span<const DatasetRecord> records,
                            const TrainConfig& cfg = TrainConfig::finetune_defaults(),
                            const detail::EpochCallback& on_epoch = {}) {
  base.require_trained();
  if (records.empty()) throw DegenerateData("fine-tuning needs records");
  TrainResult res;
  res.predictor = base;
  if (cfg.epochs <= 0) return res;
  res.split = split_indices(records.size(), cfg.val_fraction, cfg.seed);
  const auto [zt, yt] = design_matrix(base.norm, records, res.split.train);
  const auto [zv, yv] = design_matrix(base.norm, records, res.split.val);
  res.log = detail::fit(res.predictor, zt, yt, zv, yv, cfg, false, on_epoch);
  res.predictor.meta["finetune"] = cfg.to_json();
  return res;
}

// ---------------------------------------------------------------------------
// Evaluation helpers

/// Average ranks (ties share the mean rank), 1-based.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Spearman rank correlation: Pearson correlation of average ranks.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("spearman: length mismatch");
  if (a.size() < 2) return 0.0;
  const auto ra = ranks(a), rb = ranks(b);
  const double n = double(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

/// Spearman correlation per head between predictions and true metrics.
inline HeadVector heldout_spearman(const Predictor& p, std::span<const DatasetRecord> records,
                                   std::span<const std::size_t> rows) {
  const auto [z, y] = design_matrix(p.norm, records, rows);
  const MatX out = p.forward(z);
  HeadVector rho{};
  for (std::size_t k = 0; k < kNumHeads; ++k) {
    std::vector<double> a(rows.size()), b(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      a[r] = out(ix(r), ix(k));
      b[r] = y(ix(r), ix(k));
    }
    rho[k] = spearman(a, b);
  }
  return rho;
}

// ---------------------------------------------------------------------------
// Checkpoints: "DCPCKPT1", u64 header length, JSON header, little-endian f64.

inline constexpr char kCheckpointMagic[8] = {'D', 'C', 'P', 'C', 'K', 'P', 'T', '1'};

inline json normalizer_to_json(const Normalizer& n) {
  return json{{"in_mean", n.in_mean}, {"in_std", n.in_std}, {"out_mean", n.out_mean}, {"out_std", n.out_std}};
}

inline Normalizer normalizer_from_json(const json& j) {
  Normalizer n;
  n.in_mean = j.at("in_mean").get<CodeVector>();
  n.in_std = j.at("in_std").get<CodeVector>();
  n.out_mean = j.at("out_mean").get<HeadVector>();
  n.out_std = j.at("out_std").get<HeadVector>();
  n.fitted = true;
  return n;
}

namespace detail {

inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace detail

inline std::string checkpoint_bytes(const Predictor& p) {
  p.require_trained();
  json manifest = json::array();
  for (const auto& t : nn::Layout::get().tensors)
    manifest.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"offset", t.offset}});
  const json header{{"format", "dcp-predictor"}, {"version", 1},      {"dtype", "f64le"},
                    {"manifest", manifest},      {"normalizer", normalizer_to_json(p.norm)},
                    {"meta", p.meta}};
  const std::string h = header.dump();
  std::string out(kCheckpointMagic, 8);
  detail::put_u64_le(out, h.size());
  out += h;
  out.reserve(out.size() + p.net.w.size() * 8);
  for (double v : p.net.w) detail::put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

inline Predictor checkpoint_from_bytes(std::string_view bytes) {
  const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
    throw Error("not a predictor checkpoint");
  const std::uint64_t hlen = detail::get_u64_le(u + 8);
  if (hlen > bytes.size() - 16) throw Error("checkpoint header truncated");
  json header;
  try {
    header = json::parse(bytes.substr(16, hlen));
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint header: ") + e.what());
  }
  const auto& layout = nn::Layout::get();
  const auto& manifest = header.at("manifest");
  if (manifest.size() != layout.tensors.size()) throw ShapeMismatch("checkpoint has a different architecture");
  for (std::size_t i = 0; i < layout.tensors.size(); ++i) {
    const auto& t = layout.tensors[i];
    const auto& m = manifest[i];
    if (m.at("name") != t.name || m.at("shape")[0] != t.rows || m.at("shape")[1] != t.cols ||
        m.at("offset") != t.offset)
      throw ShapeMismatch("checkpoint tensor mismatch at " + t.name);
  }
  const std::size_t payload = bytes.size() - 16 - hlen;
  if (payload != layout.total * 8) throw ShapeMismatch("checkpoint payload size mismatch");
  Predictor p;
  p.norm = normalizer_from_json(header.at("normalizer"));
  p.meta = header.value("meta", json::object());
  const unsigned char* w = u + 16 + hlen;
  for (std::size_t i = 0; i < layout.total; ++i) p.net.w[i] = std::bit_cast<double>(detail::get_u64_le(w + 8 * i));
  return p;
}

inline void save_checkpoint(const Predictor& p, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_bytes(p));
}

inline Predictor load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_bytes(read_file(path));
}

}  // namespace dcp
