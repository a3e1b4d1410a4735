#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sharp/alignment.hpp"
#include "sharp/taxonomy.hpp"

namespace sharp::promptgen {

struct PersonaRole {
  std::string description;

  bool operator==(const PersonaRole&) const = default;
};

/// Reasoning blueprint injected into the prompt. Each mode maps to exactly
/// one directive line.
struct ReasoningSpec {
  enum class Mode { step_by_step, propose_verify };

  Mode mode = Mode::step_by_step;

  std::string directive() const;
  std::string_view name() const;
  static ReasoningSpec from_name(std::string_view name);  // throws ConfigError

  bool operator==(const ReasoningSpec&) const = default;
};

/// Prompt template asset: a main body with `{name}` placeholders plus one
/// text section per alignment constraint. Stored externally so generated
/// datasets can be tied to an exact template version via `hash`.
struct PromptTemplate {
  std::string body;
  std::map<Check, std::string> sections;
  std::string hash;  // content hash of the serialized asset

  static PromptTemplate builtin();
  static PromptTemplate load(const std::filesystem::path& path);
  static PromptTemplate parse(std::string_view text, std::string_view source_name);
  std::string serialize() const;
};

struct PromptInstance {
  std::string text;
  taxonomy::SeedSelection seed;
  PersonaRole persona;
  AlignmentConstraintSet constraints;
  ReasoningSpec reasoning;
  std::string template_hash;
  std::string id;  // content hash of text
};

/// Renders the synthesis prompt: Role, Task_Description, then
/// Requirements_and_Expectations with one section per enabled constraint.
/// Throws MissingPlaceholder for template variables with no binding,
/// InvalidConstraint for an enabled check with no template section, and
/// ConfigError when an input violates its invariants.
PromptInstance instantiate_prompt(const taxonomy::SeedSelection& seed,
                                  const PersonaRole& persona,
                                  const AlignmentConstraintSet& constraints,
                                  const ReasoningSpec& reasoning,
                                  const PromptTemplate& tmpl = PromptTemplate::builtin());

/// Distinguishing substring that identifies a constraint's section in
/// rendered text (used by completeness tests and leak detection).
std::string_view check_marker(Check check);

/// Persona list file: one description per line; blank lines skipped.
std::vector<PersonaRole> load_personas(const std::filesystem::path& path);
std::vector<PersonaRole> builtin_personas();

}  // namespace sharp::promptgen
