#include "sharp/difficulty.hpp"

#include <algorithm>
#include <cstdio>

#include "sharp/errors.hpp"

namespace sharp::difficulty {

Rate compute_pass_rate(const verifier::CanonicalAnswer& reference,
                       const AttemptSet& attempts, verifier::Tolerances tol) {
  if (attempts.attempts.empty()) {
    throw ConfigError("attempt set '" + attempts.record_id + "' is empty");
  }
  std::int64_t correct = 0;
  for (const auto& attempt : attempts.attempts) {
    const verifier::CanonicalAnswer parsed = verifier::parse_answer(attempt);
    if (verifier::answers_equal(parsed, reference, tol)) ++correct;
  }
  return Rate{correct, static_cast<std::int64_t>(attempts.attempts.size())};
}

PassRateReport histogram(const std::vector<std::pair<std::string, Rate>>& rates,
                         std::size_t bins) {
  if (bins < 1) throw ConfigError("histogram needs bins >= 1");
  PassRateReport report;
  report.rates = rates;
  report.bin_edges.reserve(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    report.bin_edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
  }
  report.bin_counts.assign(bins, 0);

  double sum = 0.0;
  std::size_t zeros = 0;
  std::size_t ones = 0;
  for (const auto& [id, rate] : rates) {
    if (rate.total <= 0 || rate.correct < 0 || rate.correct > rate.total) {
      throw ConfigError("rate for '" + id + "' is not a valid fraction");
    }
    // exact bin index: floor(correct * bins / total), last bin right-closed
    std::size_t idx = static_cast<std::size_t>(
        (rate.correct * static_cast<std::int64_t>(bins)) / rate.total);
    if (idx >= bins) idx = bins - 1;
    ++report.bin_counts[idx];
    sum += rate.value();
    if (rate.is_zero()) ++zeros;
    if (rate.is_one()) ++ones;
  }
  if (!rates.empty()) {
    const auto n = static_cast<double>(rates.size());
    report.mean = sum / n;
    report.mean_defined = true;
    report.fraction_zero = static_cast<double>(zeros) / n;
    report.fraction_one = static_cast<double>(ones) / n;
  }
  return report;
}

std::vector<std::string> filter_by_band(
    const std::vector<std::pair<std::string, Rate>>& rates, double lo, double hi) {
  if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
    throw ConfigError("band must satisfy 0 <= lo <= hi <= 1");
  }
  std::vector<std::string> kept;
  for (const auto& [id, rate] : rates) {
    const double v = rate.value();
    if (v >= lo && v <= hi) kept.push_back(id);
  }
  return kept;
}

std::string render_text_histogram(const PassRateReport& report, std::size_t width) {
  std::string out;
  std::size_t max_count = 1;
  for (std::size_t c : report.bin_counts) max_count = std::max(max_count, c);
  char line[160];
  for (std::size_t i = 0; i < report.bin_counts.size(); ++i) {
    const double lo = report.bin_edges[i];
    const double hi = report.bin_edges[i + 1];
    const std::size_t bar =
        report.bin_counts[i] == 0
            ? 0
            : std::max<std::size_t>(1, report.bin_counts[i] * width / max_count);
    std::snprintf(line, sizeof(line), "[%4.2f, %4.2f%s %6zu ", lo, hi,
                  i + 1 == report.bin_counts.size() ? "]" : ")", report.bin_counts[i]);
    out += line;
    out.append(bar, '#');
    out += '\n';
  }
  if (report.mean_defined) {
    std::snprintf(line, sizeof(line),
                  "mean %.4f | rate=0: %.1f%% | rate=1: %.1f%% | n=%zu\n", report.mean,
                  report.fraction_zero * 100.0, report.fraction_one * 100.0,
                  report.rates.size());
    out += line;
  } else {
    out += "no rates\n";
  }
  return out;
}

}  // namespace sharp::difficulty
