#pragma once

// Search objectives. A goal is a weight vector over (latency, energy, power,
// EDP); candidates are compared by sum_i w_i * log10(metric_i), which for a
// single metric orders exactly like the metric itself.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "dcp/costmodel.hpp"
#include "dcp/errors.hpp"

namespace dcp {

enum class Metric : std::uint8_t { Latency = 0, Energy = 1, Power = 2, Edp = 3 };

inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::Latency, Metric::Energy, Metric::Power,
                                                      Metric::Edp};

inline std::string_view metric_name(Metric m) {
  constexpr std::array<std::string_view, 4> names = {"latency", "energy", "power", "edp"};
  return names[static_cast<std::size_t>(m)];
}

inline Metric parse_metric(std::string_view s) {
  for (Metric m : kAllMetrics)
    if (metric_name(m) == s) return m;
  throw ConfigError("unknown objective '" + std::string(s) + "'");
}

inline double metric_value(const MetricVector& v, Metric m) {
  switch (m) {
    case Metric::Latency: return v.latency;
    case Metric::Energy: return v.energy;
    case Metric::Power: return v.power;
    case Metric::Edp: return v.edp;
  }
  return v.edp;
}

struct Goal {
  std::array<double, 4> weights{};

  static Goal single(Metric m) {
    Goal g;
    g.weights[static_cast<std::size_t>(m)] = 1.0;
    return g;
  }

  /// Weighted combination of metrics; lambdas must match `metrics` in length.
  static Goal mix(const std::vector<Metric>& metrics, const std::vector<double>& lambdas) {
    if (metrics.size() != lambdas.size()) throw ShapeMismatch("one weight per objective");
    Goal g;
    for (std::size_t i = 0; i < metrics.size(); ++i) g.weights[static_cast<std::size_t>(metrics[i])] += lambdas[i];
    return g;
  }

  /// Lower is better.
  double score(const MetricVector& m) const {
    double s = 0.0;
    for (Metric k : kAllMetrics) {
      const double w = weights[static_cast<std::size_t>(k)];
      if (w != 0.0) s += w * std::log10(metric_value(m, k));
    }
    return s;
  }

  /// Weights of the (latency, energy, power) predictor heads. EDP has no head
  /// and is followed through latency and energy equally.
  std::array<double, 3> head_weights() const {
    const double edp = weights[3];
    return {weights[0] + 0.5 * edp, weights[1] + 0.5 * edp, weights[2]};
  }

  std::string describe() const {
    std::string s;
    for (Metric k : kAllMetrics) {
      const double w = weights[static_cast<std::size_t>(k)];
      if (w == 0.0) continue;
      if (!s.empty()) s += "+";
      s += (w == 1.0 ? "" : std::to_string(w) + "*") + std::string(metric_name(k));
    }
    return s;
  }
};

}  // namespace dcp
