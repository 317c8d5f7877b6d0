#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "trustfuse/evidence.hpp"
#include "trustfuse/fusion.hpp"
#include "trustfuse/loss.hpp"
#include "trustfuse/metrics.hpp"

namespace {

using namespace trustfuse;

Logits random_logits(std::mt19937_64& rng, std::size_t classes) {
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  std::vector<double> z(classes);
  for (double& x : z) x = unif(rng);
  return Logits(std::move(z));
}

void BM_OpinionFromLogits(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Logits z = random_logits(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(opinion_from_logits(z));
}
BENCHMARK(BM_OpinionFromLogits)->Arg(2)->Arg(8)->Arg(64);

void BM_CombinePair(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto c = static_cast<std::size_t>(state.range(0));
  const Opinion a = opinion_from_logits(random_logits(rng, c));
  const Opinion b = opinion_from_logits(random_logits(rng, c));
  for (auto _ : state) benchmark::DoNotOptimize(combine_pair(a, b));
}
BENCHMARK(BM_CombinePair)->Arg(2)->Arg(8)->Arg(64)->Arg(512);

void BM_OverallLossAndGradient(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto c = static_cast<std::size_t>(state.range(0));
  const std::vector<Logits> logits = {random_logits(rng, c),
                                      random_logits(rng, c)};
  const auto target = one_hot_target(0, c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        overall_loss_and_gradient(logits, target, LossKind::kTrustedCE));
  }
}
BENCHMARK(BM_OverallLossAndGradient)->Arg(3)->Arg(8)->Arg(64);

void BM_PrCurveAndThreshold(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> cls(0, 4);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<TrustedPrediction> preds(static_cast<std::size_t>(state.range(0)));
  for (auto& p : preds) p = {cls(rng), cls(rng), unif(rng)};
  preds.front().predicted_class = preds.front().true_class;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_threshold(pr_curve(preds)));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PrCurveAndThreshold)->Range(64, 8192)->Complexity();

}  // namespace

BENCHMARK_MAIN();
