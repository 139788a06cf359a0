// Small end to end run: benchmark, predictor, propagation, and a random
// search given the same number of cost-model calls.

#include <cstdio>

#include "dcp/baselines.hpp"
#include "dcp/benchgen.hpp"
#include "dcp/hw_profiles.hpp"
#include "dcp/io.hpp"
#include "dcp/predictor.hpp"
#include "dcp/propagation.hpp"

int main() {
  using namespace dcp;
  const HwConfig hw = eyeriss_preset();

  const auto corpus = synthetic_corpus(12, 7);
  const auto records = generate(corpus, 200, hw, 8);
  std::printf("benchmark: %zu records over %zu layers\n", records.size(), corpus.size());

  TrainConfig tc;
  tc.epochs = 4;
  tc.seed = 9;
  const auto trained = train(records, tc, [](const EpochLog& e) {
    std::printf("  epoch %d  train %.4f  val %.4f\n", e.epoch, e.train_loss, e.val_loss);
  });
  const HeadVector rho = heldout_spearman(trained.predictor, records, trained.split.val);
  std::printf("held-out spearman: latency %.3f energy %.3f power %.3f\n", rho[0], rho[1], rho[2]);

  const LayerCode layer = corpus.front();
  const Goal goal = Goal::single(Metric::Edp);
  PropagationConfig pc;
  const auto dcp_res = propagate_layer(trained.predictor, layer, hw, goal, pc, 1);
  const auto rs = random_search({layer, hw, goal, {}}, dcp_res.evaluations, 1);

  std::printf("layer %s\n", format_layer(layer).c_str());
  std::printf("  propagation  edp %.4e  (%zu evaluations)\n", dcp_res.metric().edp, dcp_res.evaluations);
  std::printf("  random       edp %.4e  (%zu evaluations)\n", rs.metrics.edp, rs.evaluations);
  return 0;
}
