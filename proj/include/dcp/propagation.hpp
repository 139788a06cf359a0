#pragma once

// Dataflow code propagation: gradient descent on the code through a fixed
// predictor, with periodic projection to valid codes scored by the cost model.
//
// Per restart the state is the 42 dataflow slots in normalized space (layer
// slots stay fixed). Every step sets the target of each head to its current
// prediction minus one, steps against the weighted input gradient and clips
// every slot to its valid range. Every `project_every` steps the state is
// projected, evaluated with the cost model, recorded and replaces the state.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "dcp/baselines.hpp"
#include "dcp/codespace.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/errors.hpp"
#include "dcp/objective.hpp"
#include "dcp/predictor.hpp"
#include "dcp/rng.hpp"

namespace dcp {

struct PropagationConfig {
  double eta = 128.0;  // large on purpose: steps are clipped to the slot range
  int iterations = 50;
  int project_every = 2;
  int restarts = 32;
  double lambda_step = 0.1;
  bool single_precision = true;  // run the network in float during search
  SearchSpace space{};

  void check() const {
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
    if (iterations < 0) throw ConfigError("iterations must be >= 0");
    if (iterations > 0 && (project_every < 1 || project_every > iterations))
      throw ConfigError("project_every must lie in [1, iterations]");
    if (!(eta >= 0) || !std::isfinite(eta)) throw ConfigError("eta must be finite and >= 0");
    if (!(lambda_step > 0 && lambda_step <= 1)) throw ConfigError("lambda_step must lie in (0, 1]");
  }

  json to_json() const {
    return json{{"eta", eta}, {"iterations", iterations}, {"project_every", project_every},
                {"restarts", restarts}, {"lambda_step", lambda_step},
                {"single_precision", single_precision}};
  }
};

struct Candidate {
  int restart = 0;
  int iteration = 0;
  DataflowCode dataflow;                // shared code (envelope projection)
  std::vector<MetricVector> metrics;    // per layer
  double score = 0.0;
};

struct PropagationTrace {
  std::vector<double> predicted;  // mean weighted normalized prediction per iteration
  std::vector<Candidate> candidates;
  std::size_t best = 0;           // index into candidates
};

struct PropagationResult {
  DataflowCode dataflow;                    // shared code
  std::vector<DataflowCode> layer_dataflows;
  std::vector<MetricVector> metrics;        // per layer, true cost model
  double score = 0.0;
  std::size_t evaluations = 0;
  PropagationTrace trace;

  /// Metrics of the first (or only) layer.
  const MetricVector& metric() const { return metrics.front(); }
};

namespace detail {

class Propagator {
 public:
  Propagator(const Predictor& p, std::vector<LayerCode> layers, const HwConfig& hw, const Goal& goal,
             const PropagationConfig& cfg)
      : p_(p), layers_(std::move(layers)), hw_(hw), goal_(goal), cfg_(cfg) {
    p_.require_trained();
    cfg_.check();
    hw_.check();
    if (layers_.empty()) throw Error("no layers to propagate");
    for (const auto& l : layers_) l.check();
    env_ = layers_.size() == 1 ? layers_.front() : envelope_layer(layers_);
    heads_ = goal_.head_weights();
    // Valid range of each dataflow slot, in normalized space.
    std::int64_t widest = 1;
    for (Dim d : kAllDims) widest = std::max(widest, env_.dim(d));
    for (std::size_t j = 0; j < kDataflowSlots; ++j) {
      const std::size_t slot = kLayerSlots + j;
      const std::size_t off = j % kLevelSlots;
      double lo = 0, hi = double(kNumDims - 1);
      if (off == 1) {
        lo = 1;
        hi = double(hw_.pe_total);
      } else if (off >= 3 && off % 2 == 1) {
        lo = 1;
        hi = double(widest);
      }
      lo_[j] = p_.norm.normalize_slot(slot, lo);
      hi_[j] = p_.norm.normalize_slot(slot, hi);
    }
    if (cfg_.single_precision) fnet_ = p_.net.cast<float>();
    for (const auto& l : layers_) {
      const CodeVector z = p_.norm.normalize(encode(l, DataflowCode::all_ones()));
      layer_z_.emplace_back(z.begin(), z.begin() + kLayerSlots);
    }
  }

  PropagationResult run(std::uint64_t seed) {
    const int R = cfg_.restarts;
    const std::size_t L = layers_.size();
    PropagationResult res;
    std::vector<DataflowVector> y(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
      const DataflowCode init = sample_random(env_, hw_, derive_seed(seed, {std::uint64_t(r)}), cfg_.space);
      record(res, r, 0, init);
      y[std::size_t(r)] = to_state(init);
    }

    MatX z(static_cast<Eigen::Index>(std::size_t(R) * L), nn::kIn);
    for (int t = 0; t < cfg_.iterations; ++t) {
      for (int r = 0; r < R; ++r)
        for (std::size_t l = 0; l < L; ++l) {
          const Eigen::Index row = Eigen::Index(std::size_t(r) * L + l);
          for (std::size_t i = 0; i < kLayerSlots; ++i) z(row, Eigen::Index(i)) = layer_z_[l][i];
          for (std::size_t j = 0; j < kDataflowSlots; ++j)
            z(row, Eigen::Index(kLayerSlots + j)) = y[std::size_t(r)][j];
        }
      MatX preds;
      const MatX g = grad(z, &preds);
      double mean_pred = 0.0;
      for (Eigen::Index row = 0; row < preds.rows(); ++row)
        for (std::size_t k = 0; k < kNumHeads; ++k) mean_pred += heads_[k] * preds(row, Eigen::Index(k));
      res.trace.predicted.push_back(mean_pred / double(preds.rows()));

      for (int r = 0; r < R; ++r) {
        auto& yr = y[std::size_t(r)];
        for (std::size_t j = 0; j < kDataflowSlots; ++j) {
          double gsum = 0.0;
          for (std::size_t l = 0; l < L; ++l)
            gsum += g(Eigen::Index(std::size_t(r) * L + l), Eigen::Index(kLayerSlots + j));
          yr[j] = std::clamp(yr[j] - cfg_.eta * gsum, lo_[j], hi_[j]);
        }
      }
      if ((t + 1) % cfg_.project_every == 0) {
        for (int r = 0; r < R; ++r) {
          const DataflowCode df = project(to_raw(y[std::size_t(r)]), env_, hw_, cfg_.space);
          record(res, r, t + 1, df);
          y[std::size_t(r)] = to_state(df);
        }
      }
    }

    const auto& best = res.trace.candidates[res.trace.best];
    res.dataflow = best.dataflow;
    res.metrics = best.metrics;
    res.score = best.score;
    for (const auto& l : layers_) res.layer_dataflows.push_back(instance(best.dataflow, l));
    return res;
  }

  /// Summed gradient over layers for one shared normalized state (tests).
  DataflowVector summed_gradient(const DataflowVector& state) const {
    MatX z(static_cast<Eigen::Index>(layers_.size()), nn::kIn);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      for (std::size_t i = 0; i < kLayerSlots; ++i) z(Eigen::Index(l), Eigen::Index(i)) = layer_z_[l][i];
      for (std::size_t j = 0; j < kDataflowSlots; ++j) z(Eigen::Index(l), Eigen::Index(kLayerSlots + j)) = state[j];
    }
    const MatX g = grad(z, nullptr);
    DataflowVector out{};
    for (std::size_t j = 0; j < kDataflowSlots; ++j)
      for (std::size_t l = 0; l < layers_.size(); ++l) out[j] += g(Eigen::Index(l), Eigen::Index(kLayerSlots + j));
    return out;
  }

  DataflowVector to_state(const DataflowCode& df) const {
    const DataflowVector v = dataflow_vector(df);
    DataflowVector s;
    for (std::size_t j = 0; j < kDataflowSlots; ++j) s[j] = p_.norm.normalize_slot(kLayerSlots + j, v[j]);
    return s;
  }

  DataflowVector to_raw(const DataflowVector& s) const {
    DataflowVector v;
    for (std::size_t j = 0; j < kDataflowSlots; ++j) v[j] = p_.norm.denormalize_slot(kLayerSlots + j, s[j]);
    return v;
  }

  const LayerCode& envelope() const { return env_; }

 private:
  MatX grad(const MatX& z, MatX* preds) const {
    if (!cfg_.single_precision) return p_.descent_grad(z, heads_, preds);
    nn::Mat<float> fp;
    const nn::Mat<float> g = descent_grad(fnet_, nn::Mat<float>(z.cast<float>()), heads_, preds ? &fp : nullptr);
    if (preds) *preds = fp.cast<double>();
    return g.cast<double>();
  }

  DataflowCode instance(const DataflowCode& shared, const LayerCode& l) const {
    return layers_.size() == 1 ? shared : instantiate(shared, l, hw_, cfg_.space);
  }

  void record(PropagationResult& res, int restart, int iteration, const DataflowCode& df) {
    Candidate c;
    c.restart = restart;
    c.iteration = iteration;
    c.dataflow = df;
    c.score = shared_score(df, layers_, hw_, goal_, cfg_.space, &c.metrics);
    res.evaluations += layers_.size();
    auto& cands = res.trace.candidates;
    if (cands.empty() || c.score < cands[res.trace.best].score) res.trace.best = cands.size();
    cands.push_back(std::move(c));
  }

  const Predictor& p_;
  std::vector<LayerCode> layers_;
  HwConfig hw_;
  Goal goal_;
  PropagationConfig cfg_;
  LayerCode env_;
  HeadVector heads_{};
  DataflowVector lo_{}, hi_{};
  std::vector<std::vector<double>> layer_z_;
  nn::Network<float> fnet_;
};

}  // namespace detail

inline PropagationResult propagate_layer(const Predictor& p, const LayerCode& layer, const HwConfig& hw,
                                         const Goal& goal, const PropagationConfig& cfg, std::uint64_t seed) {
  return detail::Propagator(p, {layer}, hw, goal, cfg).run(seed);
}

/// One shared code for all layers. Gradients are summed over layers and
/// candidates are ranked by the summed true objective.
inline PropagationResult propagate_model(const Predictor& p, const std::vector<LayerCode>& layers,
                                         const HwConfig& hw, const Goal& goal, const PropagationConfig& cfg,
                                         std::uint64_t seed) {
  return detail::Propagator(p, layers, hw, goal, cfg).run(seed);
}

/// Propagation behind the common optimizer interface. The budget only caps
/// the cost-model evaluations; the configured schedule normally stays far below.
class DcpOptimizer final : public Optimizer {
 public:
  DcpOptimizer(const Predictor& p, PropagationConfig cfg) : p_(p), cfg_(std::move(cfg)) {}
  std::string name() const override { return "dcp"; }

  SearchOutcome run(const SearchProblem& prob, std::size_t budget, std::uint64_t seed) const override {
    PropagationConfig cfg = cfg_;
    cfg.space = prob.space;
    const std::size_t per_restart = 1 + (cfg.iterations > 0 ? std::size_t(cfg.iterations / cfg.project_every) : 0);
    if (per_restart * std::size_t(cfg.restarts) > budget)
      throw ConfigError("propagation schedule needs more evaluations than the budget");
    const auto start = std::chrono::steady_clock::now();
    const PropagationResult r = propagate_layer(p_, prob.layer, prob.hw, prob.goal, cfg, seed);
    SearchOutcome out;
    out.method = name();
    out.dataflow = r.dataflow;
    out.metrics = r.metric();
    out.score = r.score;
    out.evaluations = r.evaluations;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : r.trace.candidates) out.history.push_back(best = std::min(best, c.score));
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

 private:
  const Predictor& p_;
  PropagationConfig cfg_;
};

struct MultiEntry {
  std::vector<double> lambdas;
  PropagationResult result;
  bool pareto = false;
};

struct MultiResult {
  std::vector<Metric> objectives;
  std::vector<MultiEntry> entries;
  std::size_t knee = 0;  // Pareto entry closest to the per-objective bests
};

/// All weight vectors on the simplex with the given step, lexicographic.
inline std::vector<std::vector<double>> lambda_grid(std::size_t k, double step) {
  const int n = static_cast<int>(std::lround(1.0 / step));
  std::vector<std::vector<double>> out;
  std::vector<int> parts(k, 0);
  const auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == k) {
      parts[i] = left;
      std::vector<double> lam(k);
      for (std::size_t j = 0; j < k; ++j) lam[j] = double(parts[j]) / double(n);
      out.push_back(lam);
      return;
    }
    for (int v = left; v >= 0; --v) {
      parts[i] = v;
      self(self, i + 1, left - v);
    }
  };
  if (k > 0) rec(rec, 0, n);
  return out;
}

inline bool dominates(const MetricVector& a, const MetricVector& b, const std::vector<Metric>& objs) {
  bool strict = false;
  for (Metric m : objs) {
    if (metric_value(a, m) > metric_value(b, m)) return false;
    if (metric_value(a, m) < metric_value(b, m)) strict = true;
  }
  return strict;
}

/// Runs propagate_layer for every weight vector of the grid.
inline MultiResult propagate_multi(const Predictor& p, const LayerCode& layer, const HwConfig& hw,
                                   const std::vector<Metric>& objectives, const PropagationConfig& cfg,
                                   std::uint64_t seed) {
  if (objectives.size() < 2) throw ConfigError("multi-objective search needs at least two objectives");
  MultiResult out;
  out.objectives = objectives;
  for (const auto& lam : lambda_grid(objectives.size(), cfg.lambda_step)) {
    MultiEntry e;
    e.lambdas = lam;
    e.result = propagate_layer(p, layer, hw, Goal::mix(objectives, lam), cfg, seed);
    out.entries.push_back(std::move(e));
  }
  for (auto& e : out.entries) {
    e.pareto = true;
    for (const auto& o : out.entries)
      if (dominates(o.result.metric(), e.result.metric(), objectives)) e.pareto = false;
  }
  std::vector<double> best(objectives.size(), std::numeric_limits<double>::infinity());
  for (const auto& e : out.entries)
    for (std::size_t i = 0; i < objectives.size(); ++i)
      best[i] = std::min(best[i], metric_value(e.result.metric(), objectives[i]));
  double knee_val = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < out.entries.size(); ++k) {
    if (!out.entries[k].pareto) continue;
    double worst = 0.0;
    for (std::size_t i = 0; i < objectives.size(); ++i)
      worst = std::max(worst, metric_value(out.entries[k].result.metric(), objectives[i]) / best[i]);
    if (worst < knee_val) {
      knee_val = worst;
      out.knee = k;
    }
  }
  return out;
}

}  // namespace dcp
