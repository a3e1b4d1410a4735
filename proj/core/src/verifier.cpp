#include "sharp/verifier.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <vector>

#include "sharp/errors.hpp"
#include "sharp/hashing.hpp"
#include "sharp/textutil.hpp"

namespace sharp::verifier {

namespace {

// ---- brace scanning ---------------------------------------------------------

bool is_escaped(std::string_view s, std::size_t pos) {
  // counts the run of backslashes immediately before pos
  std::size_t backslashes = 0;
  while (pos > backslashes && s[pos - backslashes - 1] == '\\') ++backslashes;
  return (backslashes % 2) == 1;
}

/// Returns the index one past the matching close brace for the open brace at
/// `open_pos`, or npos when it never closes.
std::size_t match_brace(std::string_view s, std::size_t open_pos) {
  int depth = 0;
  for (std::size_t i = open_pos; i < s.size(); ++i) {
    const char c = s[i];
    if ((c == '{' || c == '}') && is_escaped(s, i)) continue;
    if (c == '{') ++depth;
    if (c == '}') {
      --depth;
      if (depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

bool braces_balanced(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if ((c == '{' || c == '}') && is_escaped(s, i)) continue;
    if (c == '{') ++depth;
    if (c == '}') {
      if (--depth < 0) return false;
    }
  }
  return depth == 0;
}

// ---- numeric scanning -------------------------------------------------------

/// Scans a number at the start of `s` (sign, digits with optional 3-digit
/// comma groups, decimal part, exponent). Returns consumed length, 0 when no
/// number starts there. `cleaned` receives the text with commas removed.
std::size_t scan_number(std::string_view s, std::string& cleaned) {
  cleaned.clear();
  std::size_t i = 0;
  auto digit = [&](std::size_t p) {
    return p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]));
  };
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    cleaned.push_back(s[i]);
    ++i;
  }
  bool any_digit = false;
  std::size_t run = 0;
  while (digit(i)) {
    cleaned.push_back(s[i]);
    ++i;
    ++run;
    any_digit = true;
    if (run <= 3 && i < s.size() && s[i] == ',' && digit(i + 1) && digit(i + 2) &&
        digit(i + 3) && !digit(i + 4)) {
      // comma-grouped thousands: consume ",ddd" groups greedily
      while (i < s.size() && s[i] == ',' && digit(i + 1) && digit(i + 2) &&
             digit(i + 3) && !digit(i + 4)) {
        cleaned += s.substr(i + 1, 3);
        i += 4;
      }
      break;
    }
    if (run > 3 && i < s.size() && s[i] == ',') break;
  }
  if (i < s.size() && s[i] == '.') {
    if (!any_digit && !digit(i + 1)) {
      cleaned.clear();
      return 0;
    }
    cleaned.push_back('.');
    ++i;
    while (digit(i)) {
      cleaned.push_back(s[i]);
      ++i;
      any_digit = true;
    }
  }
  if (!any_digit) {
    cleaned.clear();
    return 0;
  }
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    std::string exp;
    exp.push_back(s[i]);
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) {
      exp.push_back(s[j]);
      ++j;
    }
    if (digit(j)) {
      while (digit(j)) {
        exp.push_back(s[j]);
        ++j;
      }
      cleaned += exp;
      i = j;
    }
  }
  return i;
}

std::optional<double> to_double(const std::string& cleaned) {
  if (cleaned.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(cleaned.c_str(), &end);
  if (end != cleaned.c_str() + cleaned.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

bool skip_ws(std::string_view s, std::size_t& i) {
  const std::size_t start = i;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  return i > start;
}

bool consume(std::string_view s, std::size_t& i, std::string_view token) {
  if (s.substr(i).starts_with(token)) {
    i += token.size();
    return true;
  }
  return false;
}

std::optional<long long> scan_integer(std::string_view s, std::size_t& i) {
  std::size_t j = i;
  std::string digits;
  if (j < s.size() && (s[j] == '+' || s[j] == '-')) {
    digits.push_back(s[j]);
    ++j;
  }
  std::size_t count = 0;
  while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
    digits.push_back(s[j]);
    ++j;
    ++count;
  }
  if (count == 0 || count > 18) return std::nullopt;
  i = j;
  return std::stoll(digits);
}

/// `m \times 10^{k}` style scientific notation at the start of `s`
/// (also `\cdot`, `×`, `·`, `*`, or a bare `10^{k}`). Returns consumed length
/// via `consumed`.
std::optional<double> scan_latex_scientific(std::string_view s, std::size_t& consumed) {
  std::size_t i = 0;
  std::string mantissa;
  if (s.starts_with("10^")) {
    // bare power of ten: mantissa 1
    mantissa = "1";
    i = 0;
  } else {
    const std::size_t mantissa_len = scan_number(s, mantissa);
    if (mantissa_len == 0) return std::nullopt;
    i = mantissa_len;
    skip_ws(s, i);
    if (!(consume(s, i, "\\times") || consume(s, i, "\\cdot") ||
          consume(s, i, "\xC3\x97") /* × */ || consume(s, i, "\xC2\xB7") /* · */ ||
          consume(s, i, "*"))) {
      return std::nullopt;  // plain number, not this form
    }
    skip_ws(s, i);
  }
  if (!consume(s, i, "10^")) return std::nullopt;
  bool braced = consume(s, i, "{");
  auto exponent = scan_integer(s, i);
  if (!exponent) return std::nullopt;
  if (braced && !consume(s, i, "}")) return std::nullopt;
  if (*exponent > 400 || *exponent < -400) return std::nullopt;
  consumed = i;
  // route through strtod for correctly rounded decimal conversion
  return to_double(mantissa + "e" + std::to_string(*exponent));
}

struct RatioParts {
  long long num = 0;
  long long den = 1;
};

std::optional<RatioParts> reduce_ratio(long long a, long long b) {
  if (b == 0) return std::nullopt;
  if (a == 0) return RatioParts{0, 1};
  long long g = std::gcd(std::llabs(a), std::llabs(b));
  a /= g;
  b /= g;
  if (b < 0) {
    a = -a;
    b = -b;
  }
  return RatioParts{a, b};
}

std::optional<RatioParts> scan_frac(std::string_view s) {
  std::size_t i = 0;
  if (!(consume(s, i, "\\frac") || consume(s, i, "\\dfrac") || consume(s, i, "\\tfrac"))) {
    return std::nullopt;
  }
  skip_ws(s, i);
  if (!consume(s, i, "{")) return std::nullopt;
  skip_ws(s, i);
  auto num = scan_integer(s, i);
  if (!num) return std::nullopt;
  skip_ws(s, i);
  if (!consume(s, i, "}")) return std::nullopt;
  skip_ws(s, i);
  if (!consume(s, i, "{")) return std::nullopt;
  skip_ws(s, i);
  auto den = scan_integer(s, i);
  if (!den) return std::nullopt;
  skip_ws(s, i);
  if (!consume(s, i, "}")) return std::nullopt;
  skip_ws(s, i);
  if (i != s.size()) return std::nullopt;
  return reduce_ratio(*num, *den);
}

std::optional<RatioParts> scan_slash_ratio(std::string_view s) {
  std::size_t i = 0;
  auto num = scan_integer(s, i);
  if (!num) return std::nullopt;
  skip_ws(s, i);
  if (!consume(s, i, "/")) return std::nullopt;
  skip_ws(s, i);
  auto den = scan_integer(s, i);
  if (!den) return std::nullopt;
  skip_ws(s, i);
  if (i != s.size()) return std::nullopt;
  return reduce_ratio(*num, *den);
}

// ---- unit tokens --------------------------------------------------------------

bool unit_byte_allowed(unsigned char c) {
  if (std::isalnum(c)) return true;
  switch (c) {
    case '^':
    case '{':
    case '}':
    case '/':
    case '*':
    case '-':
    case '.':
    case '(':
    case ')':
    case ' ':
      return true;
    default:
      return false;
  }
}

/// Units are compared as normalized token text only; no dimensional analysis.
std::optional<std::string> normalize_unit(std::string_view raw) {
  std::string text = trim(raw);
  if (text.empty() || text.size() > 48) return std::nullopt;
  const auto first = static_cast<unsigned char>(text.front());
  if (std::isdigit(first)) return std::nullopt;
  // a unit token starts with a letter (or a known symbol / open paren), never
  // with an operator left over from an unparsed expression
  if (first < 0x80 && !std::isalpha(first) && first != '(') return std::nullopt;
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
      if (!unit_byte_allowed(c)) return std::nullopt;
      if (c != ' ') out.push_back(static_cast<char>(c));
      continue;
    }
    // tolerate a few common symbol codepoints: ° µ μ Ω ·
    if (i + 1 < text.size()) {
      const auto d = static_cast<unsigned char>(text[i + 1]);
      const bool known = (c == 0xC2 && (d == 0xB0 || d == 0xB5 || d == 0xB7)) ||
                         (c == 0xCE && (d == 0xBC || d == 0xA9));
      if (known) {
        out.push_back(static_cast<char>(c));
        out.push_back(static_cast<char>(d));
        ++i;
        continue;
      }
    }
    return std::nullopt;
  }
  if (out.empty() || out.size() > 32) return std::nullopt;
  return out;
}

// ---- LaTeX preprocessing ------------------------------------------------------

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

/// Unwraps \text{...} and \mathrm{...} groups and drops LaTeX spacing macros.
std::string preprocess_latex(std::string_view raw) {
  std::string s(raw);
  for (std::string_view cmd : {"\\text", "\\mathrm", "\\textrm", "\\mbox"}) {
    std::size_t pos = 0;
    while ((pos = s.find(cmd, pos)) != std::string::npos) {
      const std::size_t brace = pos + cmd.size();
      if (brace >= s.size() || s[brace] != '{') {
        pos += cmd.size();
        continue;
      }
      const std::size_t end = match_brace(s, brace);
      if (end == std::string::npos) break;
      const std::string inner = s.substr(brace + 1, end - brace - 2);
      s = s.substr(0, pos) + " " + inner + " " + s.substr(end);
    }
  }
  for (std::string_view macro : {"\\,", "\\;", "\\!", "\\ ", "\\quad", "\\qquad"}) {
    replace_all(s, macro, " ");
  }
  replace_all(s, "~", " ");
  std::string t = trim(s);
  while (t.size() >= 2 && t.front() == '$' && t.back() == '$') {
    t = trim(t.substr(1, t.size() - 2));
  }
  return collapse_whitespace(t);
}

// ---- script classification ----------------------------------------------------

enum class Script {
  latin,
  greek,
  cyrillic,
  han,
  hiragana,
  katakana,
  hangul,
  arabic,
  hebrew,
  devanagari,
  count,
};

constexpr std::string_view kScriptNames[] = {
    "Latin",  "Greek",  "Cyrillic", "Han",    "Hiragana",
    "Katakana", "Hangul", "Arabic",   "Hebrew", "Devanagari",
};

std::optional<Script> classify_codepoint(char32_t cp) {
  auto in = [cp](char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; };
  if (in(0x41, 0x5A) || in(0x61, 0x7A)) return Script::latin;
  if ((in(0xC0, 0xFF) && cp != 0xD7 && cp != 0xF7) || in(0x100, 0x24F) ||
      in(0x1E00, 0x1EFF)) {
    return Script::latin;
  }
  if (in(0x370, 0x3FF) || in(0x1F00, 0x1FFF)) return Script::greek;
  if (in(0x400, 0x4FF) || in(0x500, 0x52F)) return Script::cyrillic;
  if (in(0x4E00, 0x9FFF) || in(0x3400, 0x4DBF) || in(0xF900, 0xFAFF)) return Script::han;
  if (in(0x3040, 0x309F)) return Script::hiragana;
  if (in(0x30A0, 0x30FF)) return Script::katakana;
  if (in(0xAC00, 0xD7AF) || in(0x1100, 0x11FF) || in(0x3130, 0x318F)) return Script::hangul;
  if (in(0x600, 0x6FF) || in(0x750, 0x77F)) return Script::arabic;
  if (in(0x590, 0x5FF)) return Script::hebrew;
  if (in(0x900, 0x97F)) return Script::devanagari;
  return std::nullopt;  // digits, punctuation, math symbols, everything else
}

/// Decodes one UTF-8 codepoint at `i`; advances `i`. Invalid bytes are
/// consumed one at a time and reported as U+FFFD.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++i;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += len;
  return cp;
}

// ---- per-check implementations -------------------------------------------------

using promptgen::Check;

CheckResult pass() { return {CheckOutcome::pass, ""}; }
CheckResult fail(std::string reason) { return {CheckOutcome::fail, std::move(reason)}; }
CheckResult skipped(std::string reason) { return {CheckOutcome::skipped, std::move(reason)}; }

std::string excerpt(std::string_view s, std::size_t limit = 40) {
  std::string out = collapse_whitespace(s);
  if (out.size() > limit) out = out.substr(0, limit) + "...";
  return out;
}

CheckResult check_formatting(const inference::GenerationRecord& record,
                             const promptgen::AlignmentConstraintSet& constraints) {
  if (trim(record.question).empty()) return fail("empty question");
  if (trim(record.raw_answer).empty()) return fail("empty final answer");
  if (!braces_balanced(record.raw_answer)) {
    return fail("unbalanced braces in final answer");
  }
  if (record.reasoning.find(constraints.answer_marker + "{") != std::string::npos) {
    return fail("more than one final answer wrapper");
  }
  if (record.question.find(constraints.question_open) != std::string::npos ||
      record.question.find(constraints.question_close) != std::string::npos) {
    return fail("nested question delimiters");
  }
  return pass();
}

CheckResult check_ground_truth(const inference::GenerationRecord& record) {
  const CanonicalAnswer answer = parse_answer(record.raw_answer);
  if (answer.kind == AnswerKind::literal) {
    return fail("answer is not a verifiable number or ratio: '" +
                excerpt(record.raw_answer) + "'");
  }
  return pass();
}

std::string strip_math_spans(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_dollar = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '$' && !is_escaped(text, i)) {
      in_dollar = !in_dollar;
      continue;
    }
    if (!in_dollar && text.substr(i).starts_with("\\(")) {
      const std::size_t close = text.find("\\)", i + 2);
      if (close != std::string_view::npos) {
        i = close + 1;
        continue;
      }
    }
    if (!in_dollar) out.push_back(text[i]);
  }
  return out;
}

std::size_t count_enumerated_items(std::string_view text, std::size_t limit) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size() && i < limit; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    // boundary: start of text, or whitespace run preceded by nothing or by
    // sentence-ending punctuation
    if (i > 0) {
      std::size_t p = i;
      if (!std::isspace(static_cast<unsigned char>(text[p - 1]))) continue;
      while (p > 0 && std::isspace(static_cast<unsigned char>(text[p - 1]))) --p;
      if (p > 0) {
        const char before = text[p - 1];
        if (before != '.' && before != '!' && before != '?' && before != ':' &&
            before != ';') {
          continue;
        }
      }
    }
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j - i > 2) continue;
    if (j >= text.size() || text[j] != '.') continue;
    ++j;
    if (j >= text.size() || !std::isspace(static_cast<unsigned char>(text[j]))) continue;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j < text.size() && std::isupper(static_cast<unsigned char>(text[j]))) ++count;
  }
  return count;
}

CheckResult check_structure(const inference::GenerationRecord& record,
                            const promptgen::AlignmentConstraintSet& constraints) {
  const std::string stripped = strip_math_spans(record.question);
  const std::size_t questions =
      static_cast<std::size_t>(std::count(stripped.begin(), stripped.end(), '?'));
  if (questions > 1) {
    return fail("multiple interrogative sentences (" + std::to_string(questions) + ")");
  }
  std::size_t limit = stripped.size();
  const std::size_t marker = stripped.find(constraints.answer_marker);
  if (marker != std::string::npos) limit = marker;
  const std::string lowered = to_lower(stripped);
  const std::size_t phrase = lowered.find("final answer");
  if (phrase != std::string::npos) limit = std::min(limit, phrase);
  const std::size_t items = count_enumerated_items(stripped, limit);
  if (items >= 2) {
    return fail("multi-part enumeration (" + std::to_string(items) + " items)");
  }
  return pass();
}

CheckResult check_modality(const inference::GenerationRecord& record) {
  static constexpr std::string_view kKeywords[] = {
      "figure",   "figures",   "diagram",       "diagrams",
      "image",    "images",    "picture",       "pictures",
      "photograph", "illustration", "illustrations", "chart",
      "charts",   "as shown in", "see attached",  "depicted",
  };
  for (std::string_view keyword : kKeywords) {
    if (contains_word(record.question, keyword)) {
      return fail("references non-text modality: '" + std::string(keyword) + "'");
    }
  }
  return pass();
}

CheckResult check_language(const inference::GenerationRecord& record,
                           const AlignmentCheckOptions& options) {
  std::array<std::size_t, static_cast<std::size_t>(Script::count)> counts{};
  const std::string_view text = record.question;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = decode_utf8(text, i);
    if (auto script = classify_codepoint(cp)) {
      ++counts[static_cast<std::size_t>(*script)];
    }
  }
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) return pass();
  std::size_t best = 0;
  std::size_t runner = 0;
  std::size_t runner_idx = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] > counts[best]) best = s;
  }
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (s == best) continue;
    if (counts[s] > runner) {
      runner = counts[s];
      runner_idx = s;
    }
  }
  const double fraction = static_cast<double>(runner) / static_cast<double>(total);
  if (fraction > options.second_script_max_fraction) {
    const int pct = static_cast<int>(fraction * 100.0 + 0.5);
    return fail("second script " + std::string(kScriptNames[runner_idx]) + " is " +
                std::to_string(pct) + "% of letters");
  }
  return pass();
}

CheckResult check_authenticity(const inference::GenerationRecord& record,
                               const AlignmentCheckOptions& options) {
  const std::string question = trim(record.question);
  if (question.size() < options.min_question_chars) {
    return fail("question too short (" + std::to_string(question.size()) + " < " +
                std::to_string(options.min_question_chars) + " chars)");
  }
  if (has_unbound_placeholder(question)) {
    return fail("unsubstituted placeholder in question");
  }
  static constexpr std::string_view kTemplateMarkup[] = {
      "<Role_Start>", "<Role_End>", "<Task_Description_Start>",
      "<Requirements_and_Expectations_Start>", "<SUB>", "<BC>", "Persona_Role:",
  };
  for (std::string_view markup : kTemplateMarkup) {
    if (question.find(markup) != std::string::npos) {
      return fail("template markup leaked: '" + std::string(markup) + "'");
    }
  }
  return pass();
}

CheckResult judge_check(const inference::GenerationRecord& record,
                        const AlignmentCheckOptions& options, Check check) {
  if (!options.judge) return skipped("requires model judgment");
  const std::string criterion =
      check == Check::difficulty
          ? "meet graduate- or Olympiad-level difficulty"
          : "maintain rigorous logical consistency, with every step justified "
            "and no intuitive leaps";
  const std::string prompt = "You are auditing a generated STEM problem.\n\nProblem:\n" +
                             record.question + "\n\nReasoning:\n" + record.reasoning +
                             "\n\nDoes the problem " + criterion +
                             "? Reply with PASS or FAIL followed by a brief reason.";
  std::string response;
  try {
    response = options.judge(prompt);
  } catch (const std::exception& e) {
    return skipped(std::string("judge error: ") + e.what());
  }
  const std::string lowered = to_lower(response);
  const std::size_t pass_pos = lowered.find("pass");
  const std::size_t fail_pos = lowered.find("fail");
  if (pass_pos == std::string::npos && fail_pos == std::string::npos) {
    return fail("judge verdict unparseable: '" + excerpt(response) + "'");
  }
  if (fail_pos == std::string::npos || (pass_pos != std::string::npos && pass_pos < fail_pos)) {
    return pass();
  }
  return fail("judge verdict: '" + excerpt(response) + "'");
}

}  // namespace

std::string_view answer_kind_name(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::number:
      return "number";
    case AnswerKind::ratio:
      return "ratio";
    case AnswerKind::literal:
      return "literal";
  }
  return "literal";
}

double CanonicalAnswer::real_value() const {
  if (kind == AnswerKind::ratio) {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  return value;
}

std::string extract_boxed(std::string_view text, std::string_view marker) {
  const std::string opener = std::string(marker) + "{";
  std::size_t last = std::string_view::npos;
  std::size_t pos = 0;
  while (true) {
    const std::size_t found = text.find(opener, pos);
    if (found == std::string_view::npos) break;
    last = found;
    pos = found + 1;
  }
  if (last == std::string_view::npos) {
    throw BoxedNotFound("no '" + std::string(marker) + "{...}' wrapper found");
  }
  const std::size_t open = last + marker.size();
  const std::size_t end = match_brace(text, open);
  if (end == std::string_view::npos) {
    throw UnbalancedBraces("final answer wrapper never closes");
  }
  return std::string(text.substr(open + 1, end - open - 2));
}

CanonicalAnswer parse_answer(std::string_view raw) {
  CanonicalAnswer fallback;
  fallback.kind = AnswerKind::literal;
  fallback.literal = collapse_whitespace(raw);

  std::string s = preprocess_latex(raw);
  if (s.empty()) return fallback;

  // hex literals read as "0" + unit otherwise; they are not answers
  {
    std::size_t h = 0;
    if (h < s.size() && (s[h] == '+' || s[h] == '-')) ++h;
    if (h + 1 < s.size() && s[h] == '0' && (s[h + 1] == 'x' || s[h + 1] == 'X')) {
      return fallback;
    }
  }

  bool percent = false;
  if (s.ends_with("\\%")) {
    percent = true;
    s = trim(s.substr(0, s.size() - 2));
  } else if (s.ends_with("%")) {
    percent = true;
    s = trim(s.substr(0, s.size() - 1));
  }
  if (s.empty()) return fallback;

  if (auto ratio = scan_frac(s)) {
    if (percent) return fallback;  // percent applies to plain numbers only
    CanonicalAnswer a;
    a.kind = AnswerKind::ratio;
    a.numerator = ratio->num;
    a.denominator = ratio->den;
    return a;
  }
  if (auto ratio = scan_slash_ratio(s)) {
    if (percent) return fallback;
    CanonicalAnswer a;
    a.kind = AnswerKind::ratio;
    a.numerator = ratio->num;
    a.denominator = ratio->den;
    return a;
  }

  double value = 0.0;
  std::size_t consumed = 0;
  bool have_number = false;
  if (auto sci = scan_latex_scientific(s, consumed)) {
    value = *sci;
    have_number = true;
  } else {
    std::string cleaned;
    consumed = scan_number(s, cleaned);
    if (consumed > 0) {
      if (auto v = to_double(cleaned)) {
        value = *v;
        have_number = true;
      }
    }
  }
  if (!have_number) return fallback;

  CanonicalAnswer a;
  a.kind = AnswerKind::number;
  a.value = value;
  a.is_percent = percent;
  const std::string rest = trim(s.substr(consumed));
  if (!rest.empty()) {
    if (percent) return fallback;  // "x% unit" is not a recognized form
    auto unit = normalize_unit(rest);
    if (!unit) return fallback;
    a.unit = *unit;
  }
  return a;
}

bool answers_equal(const CanonicalAnswer& candidate, const CanonicalAnswer& reference,
                   Tolerances tol) {
  const double rel = std::max(tol.rel, 0.0);
  const double abs = std::max(tol.abs, 0.0);

  const bool c_literal = candidate.kind == AnswerKind::literal;
  const bool r_literal = reference.kind == AnswerKind::literal;
  if (c_literal != r_literal) return false;
  if (c_literal) return candidate.literal == reference.literal;

  const std::string cu = candidate.kind == AnswerKind::number ? candidate.unit : std::string();
  const std::string ru = reference.kind == AnswerKind::number ? reference.unit : std::string();
  if (cu != ru) return false;

  const bool cp = candidate.kind == AnswerKind::number && candidate.is_percent;
  const bool rp = reference.kind == AnswerKind::number && reference.is_percent;
  double cv = candidate.real_value();
  double rv = reference.real_value();
  if (cp != rp) {
    // exactly one side is a percent: x% == x/100
    if (cp) cv /= 100.0;
    if (rp) rv /= 100.0;
  }
  const double magnitude = std::max(std::abs(cv), std::abs(rv));
  return std::abs(cv - rv) <= std::max(abs, rel * magnitude);
}

std::string VerificationReport::digest() const {
  ContentHasher h;
  for (const auto& [check, result] : checks) {
    h.field(promptgen::check_name(check));
    switch (result.outcome) {
      case CheckOutcome::pass:
        h.item("pass");
        break;
      case CheckOutcome::fail:
        h.item("fail");
        h.item(result.reason);
        break;
      case CheckOutcome::skipped:
        h.item("skipped");
        break;
    }
  }
  h.field(overall ? "overall-pass" : "overall-fail");
  return h.hex();
}

bool VerificationReport::consistent(const promptgen::CheckSet& enabled) const {
  bool expected = true;
  for (promptgen::Check c : promptgen::kAllChecks) {
    auto it = checks.find(c);
    if (it == checks.end()) return false;
    if (enabled.contains(c) && it->second.outcome == CheckOutcome::fail) {
      expected = false;
    }
  }
  return expected == overall;
}

VerificationReport check_alignment(const inference::GenerationRecord& record,
                                   const promptgen::AlignmentConstraintSet& constraints,
                                   const AlignmentCheckOptions& options) {
  VerificationReport report;
  for (promptgen::Check c : promptgen::kAllChecks) {
    if (!constraints.enabled.contains(c)) {
      report.checks[c] = skipped("disabled");
      continue;
    }
    switch (c) {
      case Check::formatting:
        report.checks[c] = check_formatting(record, constraints);
        break;
      case Check::ground_truth:
        report.checks[c] = check_ground_truth(record);
        break;
      case Check::structure:
        report.checks[c] = check_structure(record, constraints);
        break;
      case Check::modality:
        report.checks[c] = check_modality(record);
        break;
      case Check::language:
        report.checks[c] = check_language(record, options);
        break;
      case Check::authenticity:
        report.checks[c] = check_authenticity(record, options);
        break;
      case Check::difficulty:
      case Check::logic:
        report.checks[c] = judge_check(record, options, c);
        break;
    }
  }
  report.overall = true;
  for (promptgen::Check c : promptgen::kAllChecks) {
    if (constraints.enabled.contains(c) &&
        report.checks[c].outcome == CheckOutcome::fail) {
      report.overall = false;
    }
  }
  return report;
}

}  // namespace sharp::verifier
