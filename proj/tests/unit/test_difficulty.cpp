#include <doctest.h>

#include <random>

#include "sharp/difficulty.hpp"
#include "sharp/errors.hpp"

using namespace sharp;
using namespace sharp::difficulty;

namespace {

Rate rate_of(const char* reference, std::vector<std::string> attempts) {
  AttemptSet set;
  set.record_id = "fixture";
  set.attempts = std::move(attempts);
  return compute_pass_rate(verifier::parse_answer(reference), set);
}

}  // namespace

TEST_CASE("three of five correct is exactly 0.6") {
  const Rate rate = rate_of("42", {"42", "42.0", "41", "oops", "4.2e1"});
  CHECK(rate.correct == 3);
  CHECK(rate.total == 5);
  CHECK(rate.value() == doctest::Approx(0.6));
}

TEST_CASE("zero of ten is exactly zero") {
  const Rate rate = rate_of("7", std::vector<std::string>(10, "8"));
  CHECK(rate.correct == 0);
  CHECK(rate.is_zero());
}

TEST_CASE("percent reference grades mixed attempt formats") {
  // per-attempt oracle under the verifier's equality rules: "0.589" passes
  // via percent normalization, "58.9\%" and "58.90%" pass directly, "59%"
  // misses the 1e-4 relative tolerance, "abc" is a literal -- 3 of 5
  const Rate rate = rate_of("58.9%", {"0.589", "59%", "58.9\\%", "abc", "58.90%"});
  CHECK(rate.correct == 3);
  CHECK(rate.total == 5);
  CHECK(rate.value() == doctest::Approx(0.6));
}

TEST_CASE("empty attempt sets are rejected") {
  AttemptSet set;
  set.record_id = "empty";
  CHECK_THROWS_AS(compute_pass_rate(verifier::parse_answer("1"), set), ConfigError);
}

TEST_CASE("rates are exact fractions invariant under scaling") {
  const Rate small{1, 5};
  const Rate scaled{20, 100};
  CHECK(small == scaled);
}

TEST_CASE("histogram fixtures") {
  {
    const auto report = histogram({{"a", {0, 5}}, {"b", {0, 5}}, {"c", {5, 5}}}, 2);
    CHECK(report.bin_counts == std::vector<std::size_t>{2, 1});
    CHECK(report.fraction_zero == doctest::Approx(2.0 / 3));
    CHECK(report.fraction_one == doctest::Approx(1.0 / 3));
  }
  {
    // 0.2 0.4 0.6 0.8 across 5 bins: one per interior bin, none in the first
    const auto report = histogram(
        {{"a", {1, 5}}, {"b", {2, 5}}, {"c", {3, 5}}, {"d", {4, 5}}}, 5);
    CHECK(report.bin_counts == std::vector<std::size_t>{0, 1, 1, 1, 1});
  }
}

TEST_CASE("empty input yields zero counts and an undefined mean") {
  const auto report = histogram({}, 4);
  CHECK(report.bin_counts == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(!report.mean_defined);
  CHECK(render_text_histogram(report).find("no rates") != std::string::npos);
}

TEST_CASE("rate 1 lands in the right-closed last bin") {
  const auto report = histogram({{"a", {5, 5}}, {"b", {9, 10}}}, 10);
  CHECK(report.bin_counts[9] == 2);
}

TEST_CASE("histogram counts always sum to the record count") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, Rate>> rates;
    const std::size_t n = rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 10);
      rates.emplace_back("r" + std::to_string(i),
                         Rate{static_cast<std::int64_t>(rng() % (k + 1)), k});
    }
    const std::size_t bins = 1 + rng() % 12;
    const auto report = histogram(rates, bins);
    std::size_t total = 0;
    for (std::size_t c : report.bin_counts) total += c;
    CHECK(total == n);
  }
}

TEST_CASE("histogram is permutation-invariant") {
  std::vector<std::pair<std::string, Rate>> rates = {
      {"a", {1, 4}}, {"b", {3, 4}}, {"c", {2, 4}}, {"d", {4, 4}}, {"e", {0, 4}}};
  const auto forward = histogram(rates, 6);
  std::reverse(rates.begin(), rates.end());
  const auto reversed = histogram(rates, 6);
  CHECK(forward.bin_counts == reversed.bin_counts);
  CHECK(forward.mean == doctest::Approx(reversed.mean));
}

TEST_CASE("band filtering keeps the closed interval") {
  const std::vector<std::pair<std::string, Rate>> rates = {
      {"zero", {0, 2}}, {"half", {1, 2}}, {"one", {2, 2}}};
  CHECK(filter_by_band(rates, 0.0, 1.0).size() == 3);
  CHECK(filter_by_band(rates, 0.2, 0.8) == std::vector<std::string>{"half"});
  CHECK(filter_by_band(rates, 0.5, 0.5) == std::vector<std::string>{"half"});
  CHECK_THROWS_AS(filter_by_band(rates, 0.8, 0.2), ConfigError);
  CHECK_THROWS_AS(filter_by_band(rates, -0.1, 0.5), ConfigError);
}
