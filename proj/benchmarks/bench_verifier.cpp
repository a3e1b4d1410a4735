#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "sharp/verifier.hpp"

namespace {

using namespace sharp::verifier;

const std::vector<std::string>& answer_corpus() {
  static const std::vector<std::string> corpus = {
      "2140",
      "58.9\\%",
      "3586",
      "3.586 \\times 10^{3}",
      "\\frac{2}{4}",
      "6.022 \\times 10^{23} \\text{mol}^{-1}",
      "1,234,567.5e-2",
      "the empty set of solutions",
      "299792458 m/s",
      "-0.00125",
  };
  return corpus;
}

void BM_parse_answer(benchmark::State& state) {
  const auto& corpus = answer_corpus();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_answer(corpus[i++ % corpus.size()]));
  }
}
BENCHMARK(BM_parse_answer);

void BM_extract_boxed(benchmark::State& state) {
  std::string text = "reasoning prefix with \\boxed{1} early ";
  for (int i = 0; i < state.range(0); ++i) text += "and more derivation text ";
  text += "\\boxed{\\frac{58.9}{100}}";
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_boxed(text));
  }
}
BENCHMARK(BM_extract_boxed)->Arg(8)->Arg(128);

void BM_answers_equal(benchmark::State& state) {
  const auto candidate = parse_answer("0.589");
  const auto reference = parse_answer("58.9\\%");
  for (auto _ : state) {
    benchmark::DoNotOptimize(answers_equal(candidate, reference));
  }
}
BENCHMARK(BM_answers_equal);

void BM_check_alignment(benchmark::State& state) {
  sharp::inference::GenerationRecord record;
  record.question =
      "A spherical detector of radius 10 meters observes an isotropic neutrino "
      "flux from a supernova at one kiloparsec; given the interaction cross "
      "section per nucleus, calculate the total number of interactions.";
  record.reasoning = "Multiply flux, cross section, and nucleus count.";
  record.raw_answer = "2140";
  const sharp::promptgen::AlignmentConstraintSet constraints;
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_alignment(record, constraints));
  }
}
BENCHMARK(BM_check_alignment);

}  // namespace
