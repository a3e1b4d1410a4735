#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sharp {

std::string trim(std::string_view s);

/// Trims and squeezes every internal whitespace run to a single space.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

/// Lowercased, punctuation-stripped word tokens; the token stream used for
/// n-gram decontamination. Tokens that become empty after stripping are
/// dropped.
std::vector<std::string> normalized_tokens(std::string_view text);

/// Case-insensitive whole-word containment. Multi-word needles match as a
/// phrase; word boundaries are ASCII non-alphanumeric characters.
bool contains_word(std::string_view haystack, std::string_view needle);

/// True when text still carries an unsubstituted `{identifier}` template
/// placeholder. Non-identifier brace content (e.g. `{$Answer$}`) does not
/// count.
bool has_unbound_placeholder(std::string_view text);

}  // namespace sharp
