#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sharp/verifier.hpp"

namespace sharp::difficulty {

/// Raw answer texts from k attempts of an evaluation model on one problem.
struct AttemptSet {
  std::string record_id;
  std::vector<std::string> attempts;

  std::size_t k() const { return attempts.size(); }
};

/// Exact rational pass rate: correct/total, never rounded.
struct Rate {
  std::int64_t correct = 0;
  std::int64_t total = 1;

  double value() const { return static_cast<double>(correct) / static_cast<double>(total); }
  bool is_zero() const { return correct == 0; }
  bool is_one() const { return correct == total; }

  friend bool operator==(const Rate& a, const Rate& b) {
    return a.correct * b.total == b.correct * a.total;  // exact cross-multiply
  }
};

/// rate = (attempts whose parsed answer verifies against the reference) / k.
/// Throws ConfigError on an empty attempt set.
Rate compute_pass_rate(const verifier::CanonicalAnswer& reference,
                       const AttemptSet& attempts, verifier::Tolerances tol = {});

struct PassRateReport {
  std::vector<std::pair<std::string, Rate>> rates;  // per record id, input order
  std::vector<double> bin_edges;                    // bins + 1 uniform edges on [0, 1]
  std::vector<std::size_t> bin_counts;              // right-closed last bin
  double mean = 0.0;
  bool mean_defined = false;
  double fraction_zero = 0.0;
  double fraction_one = 0.0;
};

/// Uniform histogram on [0, 1]. Bin assignment uses exact rational
/// arithmetic (floor(correct * bins / total)) so edge rates never land in
/// the wrong bin. Throws ConfigError for bins < 1.
PassRateReport histogram(const std::vector<std::pair<std::string, Rate>>& rates,
                         std::size_t bins);

/// Keeps ids with lo <= rate <= hi. Throws ConfigError when lo > hi or the
/// band leaves [0, 1].
std::vector<std::string> filter_by_band(
    const std::vector<std::pair<std::string, Rate>>& rates, double lo, double hi);

/// Plain-text histogram for terminal reports.
std::string render_text_histogram(const PassRateReport& report, std::size_t width = 40);

}  // namespace sharp::difficulty
