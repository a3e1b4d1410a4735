#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sharp::promptgen {

/// The eight self-alignment constraints every generated problem must satisfy.
enum class Check : std::uint8_t {
  difficulty = 0,
  logic,
  ground_truth,
  authenticity,
  language,
  structure,
  modality,
  formatting,
};

inline constexpr std::array<Check, 8> kAllChecks = {
    Check::difficulty,   Check::logic,    Check::ground_truth,
    Check::authenticity, Check::language, Check::structure,
    Check::modality,     Check::formatting,
};

std::string_view check_name(Check check);
std::optional<Check> check_from_name(std::string_view name);

/// Small value-type set over the eight checks.
class CheckSet {
public:
  static CheckSet all() {
    CheckSet s;
    s.bits_ = 0xFF;
    return s;
  }
  static CheckSet none() { return CheckSet{}; }

  bool contains(Check c) const { return (bits_ >> static_cast<int>(c)) & 1; }
  void insert(Check c) { bits_ |= std::uint8_t(1u << static_cast<int>(c)); }
  void erase(Check c) { bits_ &= std::uint8_t(~(1u << static_cast<int>(c))); }
  std::size_t size() const;
  bool empty() const { return bits_ == 0; }

  bool operator==(const CheckSet&) const = default;

private:
  std::uint8_t bits_ = 0;
};

/// The constraint set {x_v} a prompt is rendered with and a completion is
/// verified against. All eight checks are enabled by default.
struct AlignmentConstraintSet {
  std::string difficulty_level = "graduate-or-olympiad";
  std::string language = "en";
  std::string question_open = "<question_start>";
  std::string question_close = "<question_end>";
  std::string answer_marker = "\\boxed";  // final-answer wrapper command
  CheckSet enabled = CheckSet::all();

  /// Display form of the final-answer instruction, e.g. `\boxed{$Answer$}`.
  std::string answer_format_display() const { return answer_marker + "{$Answer$}"; }

  /// Enforces the delimiter invariants: distinct, nonempty, and the close
  /// marker not a substring of the open marker. Throws ConfigError.
  void validate() const;

  bool operator==(const AlignmentConstraintSet&) const = default;
};

}  // namespace sharp::promptgen
