#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sharp {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

/// FNV-1a over raw bytes. Used for all content ids so that identifiers are
/// stable across runs, platforms and standard libraries (std::hash is not).
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = kFnvOffsetBasis) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

/// Incremental hasher for composite content ids. Fields and list items are
/// separated by control bytes so ("ab","c") and ("a","bc") hash differently.
class ContentHasher {
public:
  ContentHasher& field(std::string_view s) {
    h_ = fnv1a64("\x1f", h_);
    h_ = fnv1a64(s, h_);
    return *this;
  }
  ContentHasher& item(std::string_view s) {
    h_ = fnv1a64("\x1e", h_);
    h_ = fnv1a64(s, h_);
    return *this;
  }
  std::uint64_t value() const { return h_; }
  std::string hex() const { return hex64(h_); }

private:
  std::uint64_t h_ = kFnvOffsetBasis;
};

}  // namespace sharp
