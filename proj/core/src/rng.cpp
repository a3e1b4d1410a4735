#include "sharp/rng.hpp"

#include <algorithm>
#include <numeric>

namespace sharp {

std::vector<std::size_t> RandomEngine::sample_indices(std::size_t n,
                                                      std::size_t k) {
  if (k > n) k = n;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: after i swaps the first i slots are a uniform
  // sample without replacement.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace sharp
