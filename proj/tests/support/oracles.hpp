#pragma once

// Independent oracles the tests check the implementation against. These are
// deliberately written from the definitions (exhaustive enumeration,
// unit-by-unit simulation, plain set intersection) and share no code with
// the implementation paths they validate.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace sharp::testing {

/// Exhaustive k-means oracle: minimal sum of squared distances over every
/// assignment of n points to k groups (empty groups allowed), each group
/// scored against its own mean. Feasible for n <= 8, k <= 3.
inline double brute_force_inertia(const std::vector<std::vector<double>>& points,
                                  std::size_t k) {
  const std::size_t n = points.size();
  const std::size_t dim = points.empty() ? 0 : points[0].size();
  std::vector<std::size_t> assignment(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double sse = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        ++count;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
      }
      if (count == 0) continue;
      for (double& v : mean) v /= static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        for (std::size_t d = 0; d < dim; ++d) {
          const double diff = points[i][d] - mean[d];
          sse += diff * diff;
        }
      }
    }
    best = std::min(best, sse);

    // next assignment in base-k counting order
    std::size_t pos = 0;
    while (pos < n && ++assignment[pos] == k) {
      assignment[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best;
}

/// Water-filling oracle: hand out the budget one unit at a time, always to
/// the cluster with the smallest current take among clusters with remaining
/// supply (ties to the lowest index).
inline std::vector<std::size_t> water_fill_takes(const std::vector<std::size_t>& sizes,
                                                 std::size_t budget) {
  std::vector<std::size_t> takes(sizes.size(), 0);
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  budget = std::min(budget, total);
  for (std::size_t handed = 0; handed < budget; ++handed) {
    std::size_t pick = sizes.size();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (takes[c] >= sizes[c]) continue;
      if (pick == sizes.size() || takes[c] < takes[pick]) pick = c;
    }
    ++takes[pick];
  }
  return takes;
}

/// Plain n-gram-set contamination oracle over space-joined lowercased
/// alphanumeric tokens.
inline bool shares_ngram(const std::string& a, const std::string& b, std::size_t n) {
  auto tokenize = [](const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
      const auto c = static_cast<unsigned char>(raw);
      if (std::isalnum(c)) {
        current.push_back(static_cast<char>(std::tolower(c)));
      } else if (std::isspace(c)) {
        if (!current.empty()) tokens.push_back(current);
        current.clear();
      }
      // punctuation is dropped in place
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
  };
  auto ngrams = [&](const std::string& text) {
    std::set<std::string> grams;
    const auto tokens = tokenize(text);
    if (tokens.size() < n) return grams;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram;
      for (std::size_t j = 0; j < n; ++j) {
        if (j) gram.push_back(' ');
        gram += tokens[i + j];
      }
      grams.insert(gram);
    }
    return grams;
  };
  const auto ga = ngrams(a);
  for (const auto& gram : ngrams(b)) {
    if (ga.count(gram)) return true;
  }
  return false;
}

}  // namespace sharp::testing
