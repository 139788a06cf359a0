#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "dcp/benchgen.hpp"
#include "dcp/costmodel.hpp"
#include "dcp/hw_profiles.hpp"
#include "dcp/io.hpp"

namespace dcp {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult dcp_cli(const std::string& args) {
  const std::string cmd = std::string("'") + DCP_CLI_PATH + "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
  const int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dcp_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string join(const DataflowVector& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + std::to_string(std::int64_t(x));
  return s;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(dcp_cli("").code, 1);
  EXPECT_EQ(dcp_cli("eval --layer 4,2,6,6,3,3,0").code, 1);
  EXPECT_EQ(dcp_cli("stt --matrix '1,0;0,1' --intrinsic 4,4 --hw x").code, 1);
  EXPECT_EQ(dcp_cli("eval --layer 4,2 --dataflow 1").code, 2);
  EXPECT_EQ(dcp_cli("eval --layer 4,2,6,6,3,3,0 --dataflow 1,2,3").code, 2);
  EXPECT_EQ(dcp_cli("stats --data /nonexistent/file.jsonl").code, 2);
  EXPECT_EQ(dcp_cli("stt --matrix '1,0;0,1' --intrinsic 4,4,4").code, 2);
  const fs::path dir = scratch("codes");
  EXPECT_EQ(dcp_cli("corpus --layers 2 --out " + (dir / "c.jsonl").string()).code, 0);
  EXPECT_EQ(dcp_cli("gen --corpus " + (dir / "c.jsonl").string() + " --hw nope --out " + (dir / "d.jsonl").string())
                .code,
            1);
  fs::remove_all(dir);
}

TEST(Cli, EvalMatchesLibrary) {
  const LayerCode layer{4, 2, 6, 6, 3, 3, LayerType::Conv};
  DataflowCode df;
  df[0] = {Dim::K, 1, kAllDims, {4, 2, 6, 6, 3, 3}};
  df[1] = {Dim::K, 2, kAllDims, {2, 1, 3, 3, 3, 3}};
  df[2] = {Dim::K, 1, kAllDims, {1, 1, 1, 1, 1, 1}};
  const CliResult r = dcp_cli("eval --layer 4,2,6,6,3,3,0 --dataflow " + join(dataflow_vector(df)));
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  const MetricVector m = evaluate(layer, df, eyeriss_preset());
  EXPECT_EQ(j["macs"], 1152);
  EXPECT_EQ(j["active_pes"], 2);
  EXPECT_EQ(j["compute_cycles"], 576.0);
  EXPECT_EQ(j["metrics"]["latency"].get<double>(), m.latency);
  EXPECT_EQ(j["metrics"]["energy"].get<double>(), m.energy);
  EXPECT_EQ(j["metrics"]["edp"].get<double>(), m.edp);
}

TEST(Cli, SttIdentity) {
  const CliResult r = dcp_cli("stt --matrix '1,0,0;0,1,0;0,0,1' --intrinsic 4,4,4");
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["pe_shape"], json::array({4, 4}));
  EXPECT_EQ(j["time_span"], 4);
  EXPECT_EQ(j["conflict_free"], true);
}

TEST(Cli, GenIsIndependentOfJobs) {
  const fs::path dir = scratch("jobs");
  const std::string c = (dir / "c.jsonl").string();
  ASSERT_EQ(dcp_cli("--seed 3 corpus --layers 5 --out " + c).code, 0);
  ASSERT_EQ(dcp_cli("--seed 4 --jobs 1 gen --corpus " + c + " --per-layer 40 --out " + (dir / "a.jsonl").string())
                .code,
            0);
  ASSERT_EQ(dcp_cli("--seed 4 --jobs 3 gen --corpus " + c + " --per-layer 40 --out " + (dir / "b.jsonl").string())
                .code,
            0);
  EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
  EXPECT_EQ(read_dataset(dir / "a.jsonl").size(), 200u);
  fs::remove_all(dir);
}

TEST(Cli, PipelineFindsBetterThanTypicalDataflows) {
  const fs::path dir = scratch("pipe");
  const std::string c = (dir / "c.jsonl").string(), d = (dir / "d.jsonl").string(), m = (dir / "m.ckpt").string();
  ASSERT_EQ(dcp_cli("--seed 1 corpus --layers 3 --out " + c).code, 0);
  ASSERT_EQ(dcp_cli("--seed 2 gen --corpus " + c + " --per-layer 80 --out " + d).code, 0);
  ASSERT_EQ(dcp_cli("--seed 3 train --data " + d + " --out " + m + " --epochs 2 --quiet").code, 0);
  const auto layers = read_corpus(fs::path(c));
  const auto records = read_dataset(fs::path(d));
  const LayerCode& l = layers.front();
  const std::string ls = std::to_string(l.k) + "," + std::to_string(l.c) + "," + std::to_string(l.y) + "," +
                         std::to_string(l.x) + "," + std::to_string(l.r) + "," + std::to_string(l.s) + "," +
                         std::to_string(int(l.type));
  const CliResult r = dcp_cli("--seed 4 search --ckpt " + m + " --layer " + ls +
                        " --objective edp --iterations 10 --project-every 2 --restarts 4");
  ASSERT_EQ(r.code, 0);
  const double found = json::parse(r.out)["layers"][0]["metrics"]["edp"].get<double>();
  std::vector<double> edp;
  for (const auto& rec : records)
    if (rec.layer == l) edp.push_back(rec.metrics.edp);
  ASSERT_EQ(edp.size(), 80u);
  std::sort(edp.begin(), edp.end());
  EXPECT_LE(found, 0.5 * (edp[39] + edp[40]));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dcp
