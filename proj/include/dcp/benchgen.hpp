#pragma once

// Benchmark dataset: random valid dataflows per layer, scored by the cost
// model, stored as JSON lines.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dcp/codespace.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/errors.hpp"
#include "dcp/io.hpp"
#include "dcp/parallel.hpp"
#include "dcp/rng.hpp"
#include "dcp/types.hpp"

namespace dcp {

struct DatasetRecord {
  LayerCode layer;
  DataflowCode dataflow;
  std::string hw_profile;
  MetricVector metrics;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

inline json record_to_json(const DatasetRecord& r) {
  return json{{"layer", layer_to_json(r.layer)},
              {"dataflow", dataflow_to_json(r.dataflow)},
              {"hw", r.hw_profile},
              {"metrics", metrics_to_json(r.metrics)}};
}

inline DatasetRecord record_from_json(const json& j) {
  if (!j.is_object()) throw InvalidCode("record must be an object");
  for (const char* key : {"layer", "dataflow", "hw", "metrics"})
    if (!j.contains(key)) throw InvalidCode(std::string("record missing '") + key + "'");
  DatasetRecord r;
  r.layer = layer_from_json(j["layer"]);
  r.dataflow = dataflow_from_json(j["dataflow"]);
  if (auto rep = check_structure(r.dataflow, r.layer); !rep.ok())
    throw InvalidCode("dataflow does not fit layer: " + rep.summary());
  if (!j["hw"].is_string()) throw InvalidCode("'hw' must be a string");
  r.hw_profile = j["hw"].get<std::string>();
  r.metrics = metrics_from_json(j["metrics"]);
  return r;
}

inline std::string record_line(const DatasetRecord& r) { return record_to_json(r).dump() + "\n"; }

inline std::vector<DatasetRecord> read_dataset(std::istream& in) {
  std::vector<DatasetRecord> out;
  for_each_jsonl(in, [&](std::size_t, const json& j) { out.push_back(record_from_json(j)); });
  return out;
}

inline std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return read_dataset(in);
}

using RecordSink = std::function<void(const DatasetRecord&)>;

/// Record `i` of layer `j` is drawn from derive_seed(seed, {j, i}).
inline DatasetRecord make_record(const LayerCode& layer, std::size_t layer_index,
                                 std::size_t sample_index, const HwConfig& hw, std::uint64_t seed) {
  DatasetRecord r;
  r.layer = layer;
  r.dataflow = sample_random(layer, hw, derive_seed(seed, {layer_index, sample_index}));
  r.hw_profile = hw.name;
  r.metrics = evaluate(layer, r.dataflow, hw);
  return r;
}

/// Emits |corpus| * per_layer records to `sink` in (layer, sample) order.
/// Records are computed in parallel blocks; the output does not depend on `jobs`.
inline std::size_t generate(const std::vector<LayerCode>& corpus, std::size_t per_layer,
                            const HwConfig& hw, std::uint64_t seed, const RecordSink& sink,
                            std::size_t jobs = 0) {
  if (corpus.empty()) throw Error("corpus is empty");
  if (per_layer == 0) throw Error("per_layer must be >= 1");
  hw.check();
  for (const auto& l : corpus) l.check();
  const std::size_t total = corpus.size() * per_layer;
  constexpr std::size_t kBlock = 4096;
  std::vector<DatasetRecord> block;
  std::size_t emitted = 0;
  for (std::size_t start = 0; start < total; start += kBlock) {
    const std::size_t n = std::min(kBlock, total - start);
    block.assign(n, DatasetRecord{});
    parallel_for(n, jobs, [&](std::size_t k) {
      const std::size_t g = start + k;
      block[k] = make_record(corpus[g / per_layer], g / per_layer, g % per_layer, hw, seed);
    });
    for (const auto& r : block) {
      try {
        sink(r);
      } catch (const SinkError&) {
        throw;
      } catch (const std::exception& e) {
        throw SinkError(std::string("sink failed: ") + e.what());
      }
      ++emitted;
    }
  }
  return emitted;
}

inline std::vector<DatasetRecord> generate(const std::vector<LayerCode>& corpus, std::size_t per_layer,
                                           const HwConfig& hw, std::uint64_t seed, std::size_t jobs = 0) {
  std::vector<DatasetRecord> out;
  out.reserve(corpus.size() * per_layer);
  generate(corpus, per_layer, hw, seed, [&](const DatasetRecord& r) { out.push_back(r); }, jobs);
  return out;
}

// ---------------------------------------------------------------------------
// Summary statistics

struct MetricSummary {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double mean = 0.0;
  double log10_spread = 0.0;  // log10(max / min)
};

inline constexpr std::array<const char*, 4> kMetricNames = {"latency", "energy", "power", "edp"};

inline double metric_at(const MetricVector& m, std::size_t i) {
  switch (i) {
    case 0: return m.latency;
    case 1: return m.energy;
    case 2: return m.power;
    default: return m.edp;
  }
}

struct DatasetStats {
  std::size_t count = 0;
  std::array<std::optional<MetricSummary>, 4> metrics{};  // empty when count == 0
};

class StatsAccumulator {
 public:
  void add(const MetricVector& m) {
    ++count_;
    for (std::size_t i = 0; i < 4; ++i) {
      const double v = metric_at(m, i);
      min_[i] = std::min(min_[i], v);
      max_[i] = std::max(max_[i], v);
      sum_[i] += v;
    }
  }

  DatasetStats result() const {
    DatasetStats s;
    s.count = count_;
    if (count_ == 0) return s;
    for (std::size_t i = 0; i < 4; ++i) {
      MetricSummary m;
      m.min = min_[i];
      m.max = max_[i];
      m.mean = sum_[i] / double(count_);
      m.log10_spread = min_[i] > 0 ? std::log10(max_[i] / min_[i]) : std::numeric_limits<double>::infinity();
      s.metrics[i] = m;
    }
    return s;
  }

 private:
  std::size_t count_ = 0;
  std::array<double, 4> min_{inf(), inf(), inf(), inf()};
  std::array<double, 4> max_{-inf(), -inf(), -inf(), -inf()};
  std::array<double, 4> sum_{};

  static constexpr double inf() { return std::numeric_limits<double>::infinity(); }
};

/// One pass over a JSON-lines dataset. Throws MalformedRecord.
inline DatasetStats stats(std::istream& in) {
  StatsAccumulator acc;
  for_each_jsonl(in, [&](std::size_t, const json& j) { acc.add(record_from_json(j).metrics); });
  return acc.result();
}

inline DatasetStats stats(const std::vector<DatasetRecord>& records) {
  StatsAccumulator acc;
  for (const auto& r : records) acc.add(r.metrics);
  return acc.result();
}

inline json stats_to_json(const DatasetStats& s) {
  json j{{"count", s.count}};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!s.metrics[i]) {
      j[kMetricNames[i]] = nullptr;
      continue;
    }
    const auto& m = *s.metrics[i];
    j[kMetricNames[i]] = {{"min", m.min}, {"max", m.max}, {"mean", m.mean}, {"log10_spread", m.log10_spread}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

/// Random layers: channels 1..64, square inputs 7..56, filters 1/3/5/7.
/// Roughly 60% convolutions, 20% depthwise and 20% GEMM (1x1, R = S = 1).
inline std::vector<LayerCode> synthetic_corpus(std::size_t n, std::uint64_t seed) {
  std::vector<LayerCode> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(derive_seed(seed, {0xC0, i}));
    std::uniform_int_distribution<std::int64_t> channels(1, 64), spatial(7, 56);
    std::uniform_int_distribution<int> filter(0, 3), kind(0, 9);
    LayerCode l;
    const int k = kind(rng);
    l.type = k < 6 ? LayerType::Conv : k < 8 ? LayerType::Depthwise : LayerType::Gemm;
    l.k = channels(rng);
    l.c = l.type == LayerType::Depthwise ? l.k : channels(rng);
    l.y = l.x = spatial(rng);
    const std::int64_t f = 1 + 2 * filter(rng);
    l.r = l.s = l.type == LayerType::Gemm ? 1 : f;
    out.push_back(l);
  }
  return out;
}

}  // namespace dcp
