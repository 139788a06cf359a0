#pragma once

// JSON forms of codes and metrics, JSON-lines reading and atomic file writes.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dcp/codespace.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/errors.hpp"
#include "dcp/types.hpp"

namespace dcp {

using json = nlohmann::json;

inline json layer_to_json(const LayerCode& l) {
  return json{{"k", l.k}, {"c", l.c}, {"y", l.y}, {"x", l.x},
              {"r", l.r}, {"s", l.s}, {"t", static_cast<int>(l.type)}};
}

inline LayerCode layer_from_json(const json& j) {
  if (!j.is_object()) throw InvalidCode("layer must be a JSON object");
  const auto field = [&](const char* key) -> std::int64_t {
    if (!j.contains(key) || !j[key].is_number_integer())
      throw InvalidCode(std::string("layer field '") + key + "' missing or not an integer");
    return j[key].get<std::int64_t>();
  };
  LayerCode l;
  l.k = field("k");
  l.c = field("c");
  l.y = field("y");
  l.x = field("x");
  l.r = field("r");
  l.s = field("s");
  const auto t = field("t");
  if (t < 0 || t > 2) throw InvalidCode("layer type out of range");
  l.type = static_cast<LayerType>(t);
  l.check();
  return l;
}

inline std::vector<double> parse_number_list(std::string_view text, char sep = ',') {
  std::vector<double> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, sep)) {
    const auto first = item.find_first_not_of(" \t[]");
    const auto last = item.find_last_not_of(" \t[]");
    if (first == std::string::npos) throw InvalidCode("empty entry in number list");
    item = item.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidCode("not a number: '" + item + "'");
    }
    if (used != item.size()) throw InvalidCode("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// "K,C,Y,X,R,S,T", e.g. "64,3,224,224,7,7,0".
inline LayerCode parse_layer(std::string_view text) {
  const auto v = parse_number_list(text);
  if (v.size() != kLayerSlots) throw InvalidCode("layer needs 7 comma-separated integers");
  return decode_layer(v);
}

inline std::string format_layer(const LayerCode& l) {
  return std::to_string(l.k) + "," + std::to_string(l.c) + "," + std::to_string(l.y) + "," +
         std::to_string(l.x) + "," + std::to_string(l.r) + "," + std::to_string(l.s) + "," +
         std::to_string(static_cast<int>(l.type));
}

inline json dataflow_to_json(const DataflowCode& df) {
  json arr = json::array();
  for (double v : dataflow_vector(df)) arr.push_back(static_cast<std::int64_t>(v));
  return arr;
}

inline DataflowCode dataflow_from_json(const json& j) {
  if (!j.is_array() || j.size() != kDataflowSlots)
    throw InvalidCode("dataflow must be a list of 42 integers");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw InvalidCode("dataflow entries must be integers");
    v.push_back(double(e.get<std::int64_t>()));
  }
  return decode_dataflow(v);
}

inline json metrics_to_json(const MetricVector& m) {
  return json{{"latency", m.latency}, {"energy", m.energy}, {"power", m.power}, {"edp", m.edp}};
}

inline MetricVector metrics_from_json(const json& j) {
  if (!j.is_object()) throw InvalidCode("metrics must be an object");
  MetricVector m;
  for (const char* key : {"latency", "energy", "power", "edp"})
    if (!j.contains(key) || !j[key].is_number()) throw InvalidCode(std::string("metric '") + key + "' missing");
  m.latency = j["latency"].get<double>();
  m.energy = j["energy"].get<double>();
  m.power = j["power"].get<double>();
  m.edp = j["edp"].get<double>();
  return m;
}

/// Calls `fn(line_number, parsed)` for every non-blank line. Parse failures
/// and exceptions thrown by `fn` surface as MalformedRecord with the line.
inline std::size_t for_each_jsonl(std::istream& in,
                                  const std::function<void(std::size_t, const json&)>& fn) {
  std::string line;
  std::size_t line_no = 0, count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    try {
      fn(line_no, j);
    } catch (const MalformedRecord&) {
      throw;
    } catch (const Error& e) {
      throw MalformedRecord(line_no, e.what());
    } catch (const json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    ++count;
  }
  return count;
}

/// Layer corpus: one {"k","c","y","x","r","s","t"} object per line.
inline std::vector<LayerCode> read_corpus(std::istream& in) {
  std::vector<LayerCode> out;
  for_each_jsonl(in, [&](std::size_t, const json& j) { out.push_back(layer_from_json(j)); });
  return out;
}

inline std::vector<LayerCode> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus " + path.string());
  return read_corpus(in);
}

inline std::string corpus_to_jsonl(const std::vector<LayerCode>& layers) {
  std::string out;
  for (const auto& l : layers) out += layer_to_json(l).dump() + "\n";
  return out;
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto tmp = dir / ("." + path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dcp
