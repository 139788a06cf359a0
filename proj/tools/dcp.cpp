// dcp: dataset generation, predictor training, dataflow search and reports.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcp/baselines.hpp"
#include "dcp/benchgen.hpp"
#include "dcp/codespace.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/hw_profiles.hpp"
#include "dcp/io.hpp"
#include "dcp/parallel.hpp"
#include "dcp/predictor.hpp"
#include "dcp/propagation.hpp"
#include "dcp/sttmap.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dcp;

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitInternal = 3;

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string file_digest(const fs::path& p) { return sha256_hex(read_file(p)); }

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// Run report: command echo, effective config and its hash, seed, results,
/// per-phase wall time and digests of inputs and outputs.
struct Report {
  json j = json::object();

  Report(const std::vector<std::string>& argv, const std::string& cmd, json config, std::uint64_t seed) {
    j["tool"] = "dcp";
    j["command"] = argv;
    j["subcommand"] = cmd;
    j["config"] = std::move(config);
    j["config_hash"] = sha256_hex(j["config"].dump());
    j["seed"] = seed;
    j["inputs"] = json::object();
    j["artifacts"] = json::object();
    j["timings"] = json::object();
  }

  void input(const fs::path& p) { j["inputs"][p.string()] = file_digest(p); }
  void artifact(const fs::path& p) { j["artifacts"][p.string()] = file_digest(p); }
  void timing(const std::string& phase, double s) { j["timings"][phase] = s; }
};

void write_text(const fs::path& p, const std::string& s) { write_file_atomic(p, s); }

/// Shared options and output handling of every subcommand.
struct Common {
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::string report;
  std::vector<std::string> argv;
  HwRegistry hw;

  void finish(Report& r, const json& summary) const {
    if (!report.empty()) write_text(report, dump(r.j));
    std::cout << dump(summary);
  }
};

json metrics_json(const MetricVector& m) { return metrics_to_json(m); }

json code_json(const LayerCode& l, const DataflowCode& df) {
  return json{{"layer", layer_to_json(l)}, {"dataflow", dataflow_to_json(df)}};
}

std::vector<Metric> parse_objectives(const std::string& s) {
  std::vector<Metric> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_metric(item));
  if (out.empty()) throw ConfigError("no objective given");
  return out;
}

SearchSpace parse_space(const std::string& s) {
  if (s == "full") return SearchSpace::full();
  if (s == "small") return SearchSpace::small_pow2();
  throw ConfigError("unknown space '" + s + "' (full|small)");
}

std::vector<LayerCode> load_layers(const std::vector<std::string>& layer_args, const std::string& corpus,
                                   std::size_t limit) {
  std::vector<LayerCode> layers;
  for (const auto& s : layer_args) layers.push_back(parse_layer(s));
  if (!corpus.empty()) {
    auto c = read_corpus(fs::path(corpus));
    if (limit > 0 && c.size() > limit) c.resize(limit);
    layers.insert(layers.end(), c.begin(), c.end());
  }
  if (layers.empty()) throw ConfigError("give --layer or --corpus");
  return layers;
}

struct SearchKnobs {
  double eta;
  int iterations, project_every, restarts;
  double lambda_step;
  std::string space = "full";
  bool dbl = false;

  SearchKnobs() {
    PropagationConfig d;
    eta = d.eta;
    iterations = d.iterations;
    project_every = d.project_every;
    restarts = d.restarts;
    lambda_step = d.lambda_step;
  }

  void add(CLI::App* c) {
    c->add_option("--eta", eta, "step size in normalized space");
    c->add_option("--iterations", iterations, "gradient steps per restart");
    c->add_option("--project-every", project_every, "steps between projections");
    c->add_option("--restarts", restarts, "independent restarts");
    c->add_option("--lambda-step", lambda_step, "weight grid step for --mode multi");
    c->add_option("--space", space, "full|small");
    c->add_flag("--double", dbl, "run the network in double precision");
  }

  PropagationConfig config() const {
    PropagationConfig c;
    c.eta = eta;
    c.iterations = iterations;
    c.project_every = project_every;
    c.restarts = restarts;
    c.lambda_step = lambda_step;
    c.single_precision = !dbl;
    c.space = parse_space(space);
    c.check();
    return c;
  }
};

json propagation_json(const LayerCode& layer, const PropagationResult& r, const std::vector<LayerCode>& layers) {
  json j;
  j["score"] = r.score;
  j["evaluations"] = r.evaluations;
  j["dataflow"] = dataflow_to_json(r.dataflow);
  json per = json::array();
  for (std::size_t i = 0; i < layers.size(); ++i)
    per.push_back({{"layer", layer_to_json(layers[i])},
                   {"dataflow", dataflow_to_json(r.layer_dataflows[i])},
                   {"metrics", metrics_json(r.metrics[i])}});
  j["layers"] = per;
  if (layers.size() == 1) j["metrics"] = metrics_json(r.metric());
  const auto& best = r.trace.candidates[r.trace.best];
  json running = json::array();
  double b = std::numeric_limits<double>::infinity();
  for (const auto& c : r.trace.candidates) {
    b = std::min(b, c.score);
    running.push_back(b);
  }
  j["trace"] = {{"candidates", r.trace.candidates.size()},
                {"best_restart", best.restart},
                {"best_iteration", best.iteration},
                {"predicted_first", r.trace.predicted.empty() ? json(nullptr) : json(r.trace.predicted.front())},
                {"predicted_last", r.trace.predicted.empty() ? json(nullptr) : json(r.trace.predicted.back())},
                {"running_best", running}};
  (void)layer;
  return j;
}

// ---------------------------------------------------------------------------

int cmd_corpus(const Common& g, std::size_t n, const std::string& out) {
  Report r(g.argv, "corpus", {{"layers", n}, {"seed", g.seed}}, g.seed);
  const auto layers = synthetic_corpus(n, g.seed);
  write_text(out, corpus_to_jsonl(layers));
  r.artifact(out);
  g.finish(r, {{"layers", layers.size()}, {"out", out}});
  return kExitOk;
}

int cmd_gen(const Common& g, const std::string& corpus, std::size_t per_layer, const std::string& hw_name,
            const std::string& out) {
  const HwConfig& hw = g.hw.get(hw_name);
  json cfg{{"corpus", corpus}, {"per_layer", per_layer}, {"hw", hw_name}, {"hw_config", hw}, {"seed", g.seed}};
  Report r(g.argv, "gen", cfg, g.seed);
  r.input(corpus);
  const auto layers = read_corpus(fs::path(corpus));
  const auto t0 = std::chrono::steady_clock::now();
  std::string text;
  StatsAccumulator acc;
  const std::size_t n = generate(
      layers, per_layer, hw, g.seed,
      [&](const DatasetRecord& rec) {
        text += record_line(rec);
        acc.add(rec.metrics);
      },
      g.jobs);
  write_text(out, text);
  r.timing("dataset", seconds_since(t0));
  r.artifact(out);
  r.j["results"] = {{"records", n}, {"stats", stats_to_json(acc.result())}};
  g.finish(r, r.j["results"]);
  return kExitOk;
}

TrainConfig train_config(int epochs, double lr, std::size_t batch, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = epochs;
  c.lr = lr;
  c.batch = batch;
  c.seed = seed;
  return c;
}

void log_epoch(const EpochLog& e) {
  std::fprintf(stderr, "epoch %d train %.5f val %.5f lr %.3g\n", e.epoch, e.train_loss, e.val_loss, e.lr);
}

int cmd_train(const Common& g, const std::string& data, const std::string& out, const TrainConfig& tc, bool quiet) {
  Report r(g.argv, "train", {{"data", data}, {"train", tc.to_json()}}, g.seed);
  r.input(data);
  auto t0 = std::chrono::steady_clock::now();
  const auto records = read_dataset(fs::path(data));
  r.timing("load", seconds_since(t0));
  t0 = std::chrono::steady_clock::now();
  const auto res = train(records, tc, quiet ? detail::EpochCallback{} : detail::EpochCallback(log_epoch));
  r.timing("train", seconds_since(t0));
  save_checkpoint(res.predictor, out);
  r.artifact(out);
  const HeadVector rho = heldout_spearman(res.predictor, records, res.split.val);
  r.j["results"] = {{"log", res.log.to_json()},
                    {"heldout_spearman", {{"latency", rho[0]}, {"energy", rho[1]}, {"power", rho[2]}}}};
  g.finish(r, {{"best_epoch", res.log.best_epoch},
               {"best_val_loss", res.log.best_val_loss},
               {"heldout_spearman", r.j["results"]["heldout_spearman"]},
               {"out", out}});
  return kExitOk;
}

int cmd_finetune(const Common& g, const std::string& ckpt, const std::string& data, const std::string& out,
                 const TrainConfig& tc, bool quiet) {
  Report r(g.argv, "finetune", {{"ckpt", ckpt}, {"data", data}, {"train", tc.to_json()}}, g.seed);
  r.input(ckpt);
  r.input(data);
  const Predictor base = load_checkpoint(ckpt);
  const auto records = read_dataset(fs::path(data));
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = finetune(base, records, tc, quiet ? detail::EpochCallback{} : detail::EpochCallback(log_epoch));
  r.timing("finetune", seconds_since(t0));
  save_checkpoint(res.predictor, out);
  r.artifact(out);
  r.j["results"] = {{"log", res.log.to_json()}};
  g.finish(r, {{"best_epoch", res.log.best_epoch}, {"out", out}});
  return kExitOk;
}

int cmd_search(const Common& g, const std::string& ckpt, const std::vector<LayerCode>& layers,
               const std::string& hw_name, const std::string& objective, const std::string& mode,
               const SearchKnobs& knobs, const std::string& out) {
  const HwConfig& hw = g.hw.get(hw_name);
  const PropagationConfig pc = knobs.config();
  const auto objs = parse_objectives(objective);
  json lj = json::array();
  for (const auto& l : layers) lj.push_back(layer_to_json(l));
  json cfg{{"ckpt", ckpt},     {"layers", lj},           {"hw", hw_name}, {"hw_config", hw},
           {"objective", objective}, {"mode", mode}, {"propagation", pc.to_json()},
           {"space", knobs.space}, {"seed", g.seed}};
  Report r(g.argv, "search", cfg, g.seed);
  r.input(ckpt);
  const Predictor p = load_checkpoint(ckpt);
  const auto t0 = std::chrono::steady_clock::now();
  json results;
  if (mode == "layer") {
    if (objs.size() != 1) throw ConfigError("--mode layer takes one objective");
    results["layers"] = json::array();
    for (const auto& l : layers) {
      const auto res = propagate_layer(p, l, hw, Goal::single(objs[0]), pc, g.seed);
      results["layers"].push_back(propagation_json(l, res, {l}));
    }
  } else if (mode == "model") {
    if (objs.size() != 1) throw ConfigError("--mode model takes one objective");
    const auto res = propagate_model(p, layers, hw, Goal::single(objs[0]), pc, g.seed);
    results = propagation_json(layers.front(), res, layers);
    results["envelope"] = layer_to_json(layers.size() == 1 ? layers.front() : envelope_layer(layers));
    double total = 0;
    for (const auto& m : res.metrics) total += metric_value(m, objs[0]);
    results["total"] = total;
  } else if (mode == "multi") {
    if (layers.size() != 1) throw ConfigError("--mode multi takes one layer");
    const auto res = propagate_multi(p, layers.front(), hw, objs, pc, g.seed);
    json entries = json::array();
    for (const auto& e : res.entries)
      entries.push_back({{"lambdas", e.lambdas},
                         {"pareto", e.pareto},
                         {"dataflow", dataflow_to_json(e.result.dataflow)},
                         {"metrics", metrics_json(e.result.metric())}});
    results = {{"objectives", objective}, {"entries", entries}, {"knee", res.knee}};
  } else {
    throw ConfigError("unknown mode '" + mode + "' (layer|model|multi)");
  }
  r.timing("search", seconds_since(t0));
  r.j["results"] = results;
  if (!out.empty()) {
    write_text(out, dump(results));
    r.artifact(out);
  }
  g.finish(r, results);
  return kExitOk;
}

int cmd_compare(const Common& g, const std::string& ckpt, const std::vector<LayerCode>& layers,
                const std::string& hw_name, const std::string& objective, const std::string& methods_arg,
                std::size_t budget, const SearchKnobs& knobs, const std::string& out) {
  const HwConfig& hw = g.hw.get(hw_name);
  const auto objs = parse_objectives(objective);
  if (objs.size() != 1) throw ConfigError("compare takes one objective");
  const PropagationConfig pc = knobs.config();
  std::vector<std::string> methods;
  {
    std::stringstream ss(methods_arg);
    std::string m;
    while (std::getline(ss, m, ',')) methods.push_back(m);
  }
  std::optional<Predictor> pred;
  std::vector<std::unique_ptr<Optimizer>> opts;
  for (const auto& m : methods) {
    if (m == "dcp") {
      if (ckpt.empty()) throw ConfigError("method dcp needs --ckpt");
      if (!pred) pred = load_checkpoint(ckpt);
      opts.push_back(std::make_unique<DcpOptimizer>(*pred, pc));
    } else if (m == "random") {
      opts.push_back(std::make_unique<RandomSearch>());
    } else if (m == "ga") {
      opts.push_back(std::make_unique<GeneticSearch>());
    } else if (m == "hc") {
      opts.push_back(std::make_unique<HillClimb>());
    } else {
      throw ConfigError("unknown method '" + m + "'");
    }
  }
  json lj = json::array();
  for (const auto& l : layers) lj.push_back(layer_to_json(l));
  json cfg{{"ckpt", ckpt},       {"layers", lj},   {"hw", hw_name},         {"hw_config", hw},
           {"objective", objective}, {"methods", methods}, {"budget", budget}, {"propagation", pc.to_json()},
           {"space", knobs.space}, {"seed", g.seed}};
  Report r(g.argv, "compare", cfg, g.seed);
  if (!ckpt.empty()) r.input(ckpt);

  const std::size_t M = opts.size(), L = layers.size();
  std::vector<SearchOutcome> outcomes(M * L);
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(M * L, g.jobs, [&](std::size_t k) {
    const std::size_t li = k / M, mi = k % M;
    SearchProblem prob{layers[li], hw, Goal::single(objs[0]), pc.space};
    outcomes[k] = opts[mi]->run(prob, budget, derive_seed(g.seed, {li}));
  });
  r.timing("compare", seconds_since(t0));

  json table = json::array(), times = json::object();
  std::map<std::string, std::vector<double>> per_method;
  for (std::size_t li = 0; li < L; ++li) {
    json row{{"layer", layer_to_json(layers[li])}, {"methods", json::object()}};
    for (std::size_t mi = 0; mi < M; ++mi) {
      const auto& o = outcomes[li * M + mi];
      row["methods"][o.method] = {{"metrics", metrics_json(o.metrics)},
                                  {"evaluations", o.evaluations},
                                  {"dataflow", dataflow_to_json(o.dataflow)}};
      per_method[o.method].push_back(metric_value(o.metrics, objs[0]));
      times[o.method] = times.value(o.method, 0.0) + o.seconds;
    }
    table.push_back(row);
  }
  json med = json::object();
  for (auto& [m, v] : per_method) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    med[m] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }
  json results{{"objective", objective}, {"table", table}, {"median", med}};
  r.j["results"] = results;
  r.j["timings"]["per_method"] = times;
  if (!out.empty()) {
    write_text(out, dump(results));
    r.artifact(out);
  }
  g.finish(r, {{"median", med}, {"seconds", times}});
  return kExitOk;
}

int cmd_eval(const Common& g, const std::string& layer_s, const std::string& df_s, const std::string& hw_name) {
  const HwConfig& hw = g.hw.get(hw_name);
  const LayerCode layer = parse_layer(layer_s);
  const auto v = parse_number_list(df_s);
  if (v.size() != kDataflowSlots) throw InvalidCode("dataflow must have 42 entries");
  const DataflowCode df = decode_dataflow(v);
  const auto rep = validate(df, layer, hw);
  if (!rep.ok()) throw InvalidCode("invalid dataflow: " + rep.summary());
  const auto d = evaluate_detailed(layer, df, hw);
  json j = code_json(layer, df);
  j["hw"] = hw_name;
  j["metrics"] = metrics_json(d.metrics);
  j["macs"] = macs(layer);
  j["active_pes"] = d.active_pes;
  j["compute_cycles"] = d.compute_cycles;
  Report r(g.argv, "eval", {{"layer", layer_s}, {"dataflow", df_s}, {"hw", hw_name}}, g.seed);
  r.j["results"] = j;
  g.finish(r, j);
  return kExitOk;
}

int cmd_stt(const Common& g, const std::string& matrix, const std::string& intrinsic) {
  const SttMatrix stt = SttMatrix::parse(matrix);
  const IntrinsicSize n = parse_intrinsic(intrinsic);
  const auto b = bounds(stt, n);
  json rows = json::array();
  for (const auto& [lo, hi] : b.rows) rows.push_back({lo, hi});
  json j{{"pe_shape", b.pe_shape}, {"pe_count", b.pe_count}, {"time_span", b.time_span}, {"bounds", rows}};
  const auto c = check_conflict_free(stt, n);
  j["conflict_free"] = c.conflict_free;
  j["method"] = c.method;
  if (c.witness) j["witness"] = {c.witness->first, c.witness->second};
  Report r(g.argv, "stt", {{"matrix", matrix}, {"intrinsic", intrinsic}}, g.seed);
  r.j["results"] = j;
  g.finish(r, j);
  return kExitOk;
}

int cmd_stats(const Common& g, const std::string& data) {
  Report r(g.argv, "stats", {{"data", data}}, g.seed);
  r.input(data);
  std::ifstream in(data);
  if (!in) throw Error("cannot open dataset " + data);
  const json j = stats_to_json(stats(in));
  r.j["results"] = j;
  g.finish(r, j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Common g;
  try {
    g.hw = HwRegistry::with_environment();
  } catch (const std::exception& e) {
    std::cerr << "dcp: " << e.what() << "\n";
    return kExitUsage;
  }
  g.argv.assign(argv, argv + argc);

  CLI::App app{"Dataflow code propagation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "seed for every random choice")->default_val(0);
  app.add_option("--jobs", g.jobs, "worker threads (0: all cores)")->default_val(0);
  app.add_option("--report", g.report, "write a run report here");

  std::string corpus, out, data, ckpt, hw_name = "eyeriss168", objective = "edp", mode = "layer",
                                      methods = "dcp,random,ga,hc", layer_s, df_s, matrix, intrinsic;
  std::vector<std::string> layer_args;
  std::size_t n_layers = 50, per_layer = 500, budget = 10000, limit = 0;
  int epochs = 50;
  double lr = 1e-2;
  std::size_t batch = 256;
  bool quiet = false;
  SearchKnobs knobs;

  auto* c_corpus = app.add_subcommand("corpus", "write a synthetic layer corpus");
  c_corpus->add_option("--layers", n_layers)->default_val(50);
  c_corpus->add_option("--out", out)->required();

  auto* c_gen = app.add_subcommand("gen", "sample dataflows and score them");
  c_gen->add_option("--corpus", corpus)->required();
  c_gen->add_option("--per-layer", per_layer)->default_val(500);
  c_gen->add_option("--hw", hw_name);
  c_gen->add_option("--out", out)->required();

  auto* c_train = app.add_subcommand("train", "train the predictor");
  c_train->add_option("--data", data)->required();
  c_train->add_option("--out", out)->required();
  c_train->add_option("--epochs", epochs);
  c_train->add_option("--lr", lr);
  c_train->add_option("--batch", batch);
  c_train->add_flag("--quiet", quiet);

  auto* c_ft = app.add_subcommand("finetune", "continue training on new records");
  c_ft->add_option("--ckpt", ckpt)->required();
  c_ft->add_option("--data", data)->required();
  c_ft->add_option("--out", out)->required();
  auto* ft_epochs = c_ft->add_option("--epochs", epochs);
  auto* ft_lr = c_ft->add_option("--lr", lr);
  c_ft->add_flag("--quiet", quiet);

  auto* c_search = app.add_subcommand("search", "propagate dataflow codes");
  c_search->add_option("--ckpt", ckpt)->required();
  c_search->add_option("--layer", layer_args, "K,C,Y,X,R,S,T (repeatable)");
  c_search->add_option("--corpus", corpus);
  c_search->add_option("--limit", limit, "first N corpus layers");
  c_search->add_option("--hw", hw_name);
  c_search->add_option("--objective", objective, "latency|energy|power|edp, comma list for multi");
  c_search->add_option("--mode", mode, "layer|model|multi");
  c_search->add_option("--out", out, "deterministic result file");
  knobs.add(c_search);

  auto* c_cmp = app.add_subcommand("compare", "DCP against black-box baselines");
  c_cmp->add_option("--ckpt", ckpt);
  c_cmp->add_option("--layer", layer_args);
  c_cmp->add_option("--corpus", corpus);
  c_cmp->add_option("--limit", limit);
  c_cmp->add_option("--hw", hw_name);
  c_cmp->add_option("--objective", objective);
  c_cmp->add_option("--methods", methods);
  c_cmp->add_option("--budget", budget)->default_val(10000);
  c_cmp->add_option("--out", out);
  knobs.add(c_cmp);

  auto* c_eval = app.add_subcommand("eval", "score one dataflow with the cost model");
  c_eval->add_option("--layer", layer_s)->required();
  c_eval->add_option("--dataflow", df_s, "42 integers")->required();
  c_eval->add_option("--hw", hw_name);

  auto* c_stt = app.add_subcommand("stt", "space-time transformation bounds and conflicts");
  c_stt->add_option("--matrix", matrix, "rows separated by ';'")->required();
  c_stt->add_option("--intrinsic", intrinsic)->required();

  auto* c_stats = app.add_subcommand("stats", "summary of a dataset");
  c_stats->add_option("--data", data)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_corpus) return cmd_corpus(g, n_layers, out);
    if (*c_gen) return cmd_gen(g, corpus, per_layer, hw_name, out);
    if (*c_train) return cmd_train(g, data, out, train_config(epochs, lr, batch, g.seed), quiet);
    if (*c_ft) {
      TrainConfig tc = TrainConfig::finetune_defaults();
      if (ft_epochs->count()) tc.epochs = epochs;
      if (ft_lr->count()) tc.lr = lr;
      tc.seed = g.seed;
      return cmd_finetune(g, ckpt, data, out, tc, quiet);
    }
    if (*c_search) return cmd_search(g, ckpt, load_layers(layer_args, corpus, limit), hw_name, objective, mode, knobs, out);
    if (*c_cmp)
      return cmd_compare(g, ckpt, load_layers(layer_args, corpus, limit), hw_name, objective, methods, budget, knobs, out);
    if (*c_eval) return cmd_eval(g, layer_s, df_s, hw_name);
    if (*c_stt) return cmd_stt(g, matrix, intrinsic);
    if (*c_stats) return cmd_stats(g, data);
  } catch (const ConfigError& e) {
    std::cerr << "dcp: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "dcp: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "dcp: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
