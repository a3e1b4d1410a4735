#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "sharp/alignment.hpp"
#include "sharp/records.hpp"

namespace sharp::verifier {

enum class AnswerKind { number, ratio, literal };

std::string_view answer_kind_name(AnswerKind kind);

/// Normalized comparable answer value. Numbers keep their written magnitude;
/// percent normalization (x% == x/100) is applied lazily during comparison,
/// and only when exactly one side carries the percent flag.
struct CanonicalAnswer {
  AnswerKind kind = AnswerKind::literal;
  double value = 0.0;     // number kind; finite
  std::string unit;       // number kind; normalized token text, may be empty
  bool is_percent = false;
  long long numerator = 0;    // ratio kind; lowest terms
  long long denominator = 1;  // ratio kind; > 0
  std::string literal;        // literal kind; whitespace-normalized source

  /// number -> value (percent not applied); ratio -> numerator/denominator.
  double real_value() const;

  bool operator==(const CanonicalAnswer&) const = default;
};

/// Returns the brace-balanced payload of the last `\boxed{...}` in `text`.
/// Escaped braces (`\{`, `\}`) do not participate in balancing.
/// Throws BoxedNotFound when no wrapper exists and UnbalancedBraces when the
/// last wrapper never closes.
std::string extract_boxed(std::string_view text,
                          std::string_view marker = "\\boxed");

/// Total function: recognizes integers and decimals, e-notation,
/// `m \times 10^{k}` scientific forms, percent suffixes (`%`, `\%`),
/// trailing unit tokens, and simple `\frac{a}{b}` / `a/b` integer ratios.
/// Anything else degrades to literal kind with whitespace-normalized text.
CanonicalAnswer parse_answer(std::string_view raw);

struct Tolerances {
  double rel = 1e-4;
  double abs = 1e-9;
};

/// Semantic equality: numeric kinds compare with
/// |c - r| <= max(abs, rel * max(|c|, |r|)) after percent normalization;
/// units compare as normalized text; literals compare whitespace-normalized;
/// mixed numeric/literal is false. Symmetric in its arguments.
bool answers_equal(const CanonicalAnswer& candidate,
                   const CanonicalAnswer& reference, Tolerances tol = {});

enum class CheckOutcome { pass, fail, skipped };

struct CheckResult {
  CheckOutcome outcome = CheckOutcome::skipped;
  std::string reason;  // empty for pass

  bool operator==(const CheckResult&) const = default;
};

struct VerificationReport {
  std::map<promptgen::Check, CheckResult> checks;  // all eight present
  bool overall = false;  // no enabled check failed

  /// Short content digest of the outcomes, recorded in dataset metadata.
  std::string digest() const;
  /// True when `overall` agrees with the per-check map.
  bool consistent(const promptgen::CheckSet& enabled) const;
};

/// Optional external judge for the difficulty and logic checks. Receives a
/// judging prompt and returns the judge model's raw response. When absent,
/// those checks are recorded as skipped ("requires model judgment") rather
/// than faked.
using JudgeFn = std::function<std::string(const std::string& prompt)>;

struct AlignmentCheckOptions {
  std::size_t min_question_chars = 40;
  double second_script_max_fraction = 0.10;
  JudgeFn judge;  // empty => difficulty/logic skipped
};

/// Runs the enabled alignment checks on a parsed generation record.
/// Failures are report entries, never exceptions.
VerificationReport check_alignment(const inference::GenerationRecord& record,
                                   const promptgen::AlignmentConstraintSet& constraints,
                                   const AlignmentCheckOptions& options = {});

}  // namespace sharp::verifier
