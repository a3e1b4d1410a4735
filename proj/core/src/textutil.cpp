#include "sharp/textutil.hpp"

#include <algorithm>
#include <cctype>

namespace sharp {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_run = false;
  for (char c : s) {
    if (is_space(static_cast<unsigned char>(c))) {
      in_run = true;
      continue;
    }
    if (in_run && !out.empty()) out.push_back(' ');
    in_run = false;
    out.push_back(c);
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (is_space(uc)) {
      flush();
    } else if (is_alnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    }
    // punctuation and other bytes are stripped
  }
  flush();
  return tokens;
}

bool contains_word(std::string_view haystack, std::string_view needle) {
  const std::string hay = to_lower(collapse_whitespace(haystack));
  const std::string pat = to_lower(collapse_whitespace(needle));
  if (pat.empty()) return false;
  std::size_t pos = 0;
  while ((pos = hay.find(pat, pos)) != std::string::npos) {
    const bool left_ok =
        pos == 0 || !is_alnum(static_cast<unsigned char>(hay[pos - 1]));
    const std::size_t end = pos + pat.size();
    const bool right_ok =
        end == hay.size() || !is_alnum(static_cast<unsigned char>(hay[end]));
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

bool has_unbound_placeholder(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') continue;
    // LaTeX command arguments (\text{mol}) and math scripts (x^{ab}) are not
    // template placeholders
    if (i > 0 && (text[i - 1] == '^' || text[i - 1] == '_')) continue;
    std::size_t back = i;
    while (back > 0 && std::isalpha(static_cast<unsigned char>(text[back - 1]))) --back;
    if (back > 0 && back < i && text[back - 1] == '\\') continue;
    std::size_t j = i + 1;
    if (j >= text.size()) break;
    const auto first = static_cast<unsigned char>(text[j]);
    if (!std::isalpha(first) && text[j] != '_') continue;
    ++j;
    while (j < text.size() &&
           (is_alnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
      ++j;
    }
    if (j < text.size() && text[j] == '}') return true;
  }
  return false;
}

}  // namespace sharp
