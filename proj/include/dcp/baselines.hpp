#pragma once

// Budgeted black-box baselines over the same code space and cost model:
// random search, a genetic algorithm on level blocks and a (1+1) hill climber.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "dcp/codespace.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/errors.hpp"
#include "dcp/objective.hpp"
#include "dcp/rng.hpp"

namespace dcp {

struct SearchProblem {
  LayerCode layer;
  HwConfig hw;
  Goal goal = Goal::single(Metric::Edp);
  SearchSpace space{};
};

struct SearchOutcome {
  std::string method;
  DataflowCode dataflow;
  MetricVector metrics;
  double score = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  double seconds = 0.0;
  std::vector<double> history;  // incumbent score after each evaluation
};

/// Common interface of every search method.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual std::string name() const = 0;
  virtual SearchOutcome run(const SearchProblem& problem, std::size_t budget, std::uint64_t seed) const = 0;
};

namespace detail {

/// Evaluation counter that keeps the incumbent.
class Tracker {
 public:
  Tracker(const SearchProblem& p, std::size_t budget, std::string method) : p_(p), budget_(budget) {
    out_.method = std::move(method);
    out_.history.reserve(std::min<std::size_t>(budget, 1 << 20));
  }

  bool exhausted() const { return out_.evaluations >= budget_; }

  /// Scores `df`; returns its score.
  double eval(const DataflowCode& df) {
    if (exhausted()) throw Error("evaluation budget exceeded");
    const MetricVector m = evaluate(p_.layer, df, p_.hw);
    const double s = p_.goal.score(m);
    ++out_.evaluations;
    if (s < out_.score) {
      out_.score = s;
      out_.dataflow = df;
      out_.metrics = m;
    }
    out_.history.push_back(out_.score);
    return s;
  }

  SearchOutcome finish(std::chrono::steady_clock::time_point start) {
    out_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return std::move(out_);
  }

 private:
  const SearchProblem& p_;
  std::size_t budget_;
  SearchOutcome out_;
};

}  // namespace detail

/// Sample i of every seeded search comes from derive_seed(seed, {i}).
inline DataflowCode seeded_sample(const SearchProblem& p, std::uint64_t seed, std::uint64_t i) {
  return sample_random(p.layer, p.hw, derive_seed(seed, {i}), p.space);
}

inline SearchOutcome random_search(const SearchProblem& p, std::size_t budget, std::uint64_t seed) {
  if (budget < 1) throw ConfigError("budget must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  detail::Tracker t(p, budget, "random");
  for (std::uint64_t i = 0; !t.exhausted(); ++i) t.eval(seeded_sample(p, seed, i));
  return t.finish(start);
}

/// One random edit: a tile size doubled or halved, two loops swapped, a new
/// parallel dim, or a PE count doubled or halved. The result is projected.
inline DataflowCode mutate(const DataflowCode& df, const SearchProblem& p, Rng& rng) {
  DataflowCode m = df;
  std::uniform_int_distribution<int> op(0, 3), lvl(0, int(kNumLevels) - 1), dim(0, int(kNumDims) - 1),
      coin(0, 1);
  auto& lv = m[std::size_t(lvl(rng))];
  switch (op(rng)) {
    case 0: {
      auto& s = lv.sizes[std::size_t(dim(rng))];
      s = coin(rng) ? s * 2 : std::max<std::int64_t>(s / 2, 1);
      break;
    }
    case 1: {
      const auto a = std::size_t(dim(rng));
      auto b = std::size_t(dim(rng));
      if (a == b) b = (a + 1) % kNumDims;
      std::swap(lv.order[a], lv.order[b]);
      break;
    }
    case 2: lv.parallel_dim = dim_at(std::size_t(dim(rng))); break;
    default: lv.pe_count = coin(rng) ? lv.pe_count * 2 : std::max<std::int64_t>(lv.pe_count / 2, 1); break;
  }
  return project(dataflow_vector(m), p.layer, p.hw, p.space);
}

struct GaParams {
  std::size_t population = 50;
  std::size_t tournament = 4;
  double crossover = 0.9;
  double mutation = 0.2;
  std::size_t elitism = 1;
};

inline SearchOutcome ga_search(const SearchProblem& p, std::size_t budget, std::uint64_t seed,
                               const GaParams& ga = {}) {
  if (ga.population < 1) throw ConfigError("population must be >= 1");
  if (budget < ga.population) throw ConfigError("budget must be >= population");
  const auto start = std::chrono::steady_clock::now();
  detail::Tracker t(p, budget, "ga");
  struct Ind {
    DataflowCode df;
    double score;
  };
  std::vector<Ind> pop;
  for (std::size_t i = 0; i < ga.population; ++i) {
    const DataflowCode df = seeded_sample(p, seed, i);
    pop.push_back({df, t.eval(df)});
  }
  Rng rng = make_rng(derive_seed(seed, {0x6A6A}));
  std::uniform_int_distribution<std::size_t> pick(0, ga.population - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto tournament = [&]() -> const Ind& {
    std::size_t best = pick(rng);
    for (std::size_t k = 1; k < ga.tournament; ++k) {
      const std::size_t c = pick(rng);
      if (pop[c].score < pop[best].score) best = c;
    }
    return pop[best];
  };
  while (!t.exhausted()) {
    std::vector<Ind> next;
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pop[a].score < pop[b].score; });
    for (std::size_t e = 0; e < std::min(ga.elitism, pop.size()); ++e) next.push_back(pop[order[e]]);
    while (next.size() < ga.population && !t.exhausted()) {
      const Ind& a = tournament();
      const Ind& b = tournament();
      DataflowCode child = a.df;
      bool changed = false;
      if (u(rng) < ga.crossover) {
        for (std::size_t l = 0; l < kNumLevels; ++l)
          if (u(rng) < 0.5) child[l] = b.df[l];
        child = project(dataflow_vector(child), p.layer, p.hw, p.space);
        changed = true;
      }
      if (u(rng) < ga.mutation) {
        child = mutate(child, p, rng);
        changed = true;
      }
      next.push_back({child, changed ? t.eval(child) : a.score});
    }
    if (next.size() < ga.population) break;  // budget ran out mid-generation
    pop = std::move(next);
  }
  return t.finish(start);
}

struct HillClimbParams {
  std::size_t patience = 200;  // consecutive rejections before a restart
};

/// (1+1) search: mutate the current point, keep the child if strictly better.
/// `accepted` receives the score of every accepted point (restarts included).
inline SearchOutcome hill_climb(const SearchProblem& p, std::size_t budget, std::uint64_t seed,
                                const HillClimbParams& hc = {}, std::vector<std::vector<double>>* accepted = nullptr) {
  if (budget < 1) throw ConfigError("budget must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  detail::Tracker t(p, budget, "hc");
  Rng rng = make_rng(derive_seed(seed, {0x41C1}));
  std::uint64_t restart = 0;
  DataflowCode cur = seeded_sample(p, seed, restart);
  double cur_score = t.eval(cur);
  if (accepted) accepted->push_back({cur_score});
  std::size_t rejections = 0;
  while (!t.exhausted()) {
    if (rejections >= hc.patience) {
      cur = seeded_sample(p, seed, ++restart);
      cur_score = t.eval(cur);
      if (accepted) accepted->push_back({cur_score});
      rejections = 0;
      continue;
    }
    const DataflowCode cand = mutate(cur, p, rng);
    const double s = t.eval(cand);
    if (s < cur_score) {
      cur = cand;
      cur_score = s;
      rejections = 0;
      if (accepted) accepted->back().push_back(s);
    } else {
      ++rejections;
    }
  }
  return t.finish(start);
}

class RandomSearch final : public Optimizer {
 public:
  std::string name() const override { return "random"; }
  SearchOutcome run(const SearchProblem& p, std::size_t budget, std::uint64_t seed) const override {
    return random_search(p, budget, seed);
  }
};

class GeneticSearch final : public Optimizer {
 public:
  explicit GeneticSearch(GaParams params = {}) : params_(params) {}
  std::string name() const override { return "ga"; }
  SearchOutcome run(const SearchProblem& p, std::size_t budget, std::uint64_t seed) const override {
    return ga_search(p, budget, seed, params_);
  }

 private:
  GaParams params_;
};

class HillClimb final : public Optimizer {
 public:
  std::string name() const override { return "hc"; }
  SearchOutcome run(const SearchProblem& p, std::size_t budget, std::uint64_t seed) const override {
    return hill_climb(p, budget, seed);
  }
};

// ---------------------------------------------------------------------------
// Shared dataflows over several layers

/// Smallest layer containing every layer of the list: per-dim maxima, and the
/// common type when all layers share one (convolution otherwise).
inline LayerCode envelope_layer(const std::vector<LayerCode>& layers) {
  if (layers.empty()) throw Error("no layers");
  LayerCode e = layers.front();
  for (const auto& l : layers) {
    e.k = std::max(e.k, l.k);
    e.c = std::max(e.c, l.c);
    e.y = std::max(e.y, l.y);
    e.x = std::max(e.x, l.x);
    e.r = std::max(e.r, l.r);
    e.s = std::max(e.s, l.s);
    if (l.type != e.type) e.type = LayerType::Conv;
  }
  if (e.type == LayerType::Depthwise && e.k != e.c) e.type = LayerType::Conv;
  if (e.type == LayerType::Gemm && (e.r != 1 || e.s != 1)) e.type = LayerType::Conv;
  return e;
}

/// Dataflow of `layer` under a shared code fitted to a larger envelope.
inline DataflowCode instantiate(const DataflowCode& shared, const LayerCode& layer, const HwConfig& hw,
                                const SearchSpace& space = {}) {
  return project(dataflow_vector(shared), layer, hw, space);
}

/// log10 of the summed per-layer objective of one shared code; a single
/// layer scores as in the layer-level search.
inline double shared_score(const DataflowCode& shared, const std::vector<LayerCode>& layers, const HwConfig& hw,
                           const Goal& goal, const SearchSpace& space, std::vector<MetricVector>* metrics = nullptr) {
  double total = 0.0, single = 0.0;
  if (metrics) metrics->clear();
  for (const auto& l : layers) {
    const DataflowCode df = layers.size() == 1 ? shared : instantiate(shared, l, hw, space);
    const MetricVector m = evaluate(l, df, hw);
    if (metrics) metrics->push_back(m);
    single = goal.score(m);
    total += std::pow(10.0, single);
  }
  return layers.size() == 1 ? single : std::log10(total);
}

struct SharedOutcome {
  DataflowCode dataflow;
  std::vector<MetricVector> metrics;
  double score = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

/// Random search for one dataflow shared by every layer.
inline SharedOutcome random_search_shared(const std::vector<LayerCode>& layers, const HwConfig& hw,
                                          const Goal& goal, std::size_t budget, std::uint64_t seed,
                                          const SearchSpace& space = {}) {
  if (budget < 1) throw ConfigError("budget must be >= 1");
  const LayerCode env = layers.size() == 1 ? layers.front() : envelope_layer(layers);
  SharedOutcome out;
  std::vector<MetricVector> ms;
  for (std::size_t i = 0; i < budget; ++i) {
    const DataflowCode df = sample_random(env, hw, derive_seed(seed, {i}), space);
    const double s = shared_score(df, layers, hw, goal, space, &ms);
    ++out.evaluations;
    if (s < out.score) {
      out.score = s;
      out.dataflow = df;
      out.metrics = ms;
    }
  }
  return out;
}

}  // namespace dcp
