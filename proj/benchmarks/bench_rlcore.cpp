#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "sharp/rlcore.hpp"

namespace {

using namespace sharp::rlcore;

void BM_group_advantages(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::vector<double> rewards(64);
  for (auto& r : rewards) r = static_cast<double>(rng() % 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_advantages(rewards));
  }
}
BENCHMARK(BM_group_advantages);

void BM_kl_estimate(benchmark::State& state) {
  double a = -1.25;
  double b = -1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kl_estimate(a, b));
    std::swap(a, b);
  }
}
BENCHMARK(BM_kl_estimate);

void BM_grpo_objective(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logp(-4.0, -0.01);
  const std::size_t group_count = 8;
  const std::size_t outputs = 64;
  const std::size_t tokens = static_cast<std::size_t>(state.range(0));

  std::vector<TrajectoryGroup> trajectories(group_count);
  std::vector<RewardGroup> groups;
  for (auto& traj : trajectories) {
    std::vector<double> rewards;
    for (std::size_t o = 0; o < outputs; ++o) {
      OutputLogProbs output(tokens);
      for (auto& token : output) {
        token.logp_old = logp(rng);
        token.logp_new = token.logp_old + 0.05;
        if (token.logp_new > 0) token.logp_new = token.logp_old;
        token.logp_ref = logp(rng);
      }
      traj.outputs.push_back(std::move(output));
      rewards.push_back(static_cast<double>(rng() % 2));
    }
    groups.push_back(group_advantages(rewards));
  }

  GrpoParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grpo_objective(trajectories, groups, params));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(group_count * outputs * tokens));
}
BENCHMARK(BM_grpo_objective)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
