#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "sharp/curation.hpp"

namespace {

using namespace sharp::curation;

EmbeddingSet random_embeddings(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  EmbeddingSet set;
  set.dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> vec(dim);
    for (auto& v : vec) v = coord(rng);
    set.vectors.emplace_back("r" + std::to_string(i), std::move(vec));
  }
  return set;
}

void BM_kmeans(benchmark::State& state) {
  const auto set = random_embeddings(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans(set, 16, 7));
  }
}
BENCHMARK(BM_kmeans)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_hash_embedding(benchmark::State& state) {
  const std::string text =
      "Determine the equilibrium constant of the reaction given the standard "
      "free energy change at 298 kelvin and one bar of pressure.";
  for (auto _ : state) {
    benchmark::DoNotOptimize(hash_embedding(text, 64));
  }
}
BENCHMARK(BM_hash_embedding);

void BM_dedup(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto set = random_embeddings(n, 32);
  std::vector<RecordView> records;
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back(RecordView{"r" + std::to_string(i),
                                 "unique question number " + std::to_string(i)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(dedup(records, set, 0.95));
  }
}
BENCHMARK(BM_dedup)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_decontaminate(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto sentence = [&rng](std::size_t words) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
      if (i) out.push_back(' ');
      out += "token" + std::to_string(rng() % 4000);
    }
    return out;
  };
  std::vector<std::string> benchmarks;
  for (int i = 0; i < 50; ++i) benchmarks.push_back(sentence(80));
  std::vector<RecordView> records;
  for (int i = 0; i < 500; ++i) {
    records.push_back(RecordView{"r" + std::to_string(i), sentence(60)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(decontaminate(records, benchmarks, 13));
  }
}
BENCHMARK(BM_decontaminate)->Unit(benchmark::kMillisecond);

}  // namespace
