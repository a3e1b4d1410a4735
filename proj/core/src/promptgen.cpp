#include "sharp/promptgen.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "sharp/errors.hpp"
#include "sharp/hashing.hpp"
#include "sharp/textutil.hpp"

namespace sharp::promptgen {

namespace {

constexpr std::string_view kCheckNames[] = {
    "difficulty", "logic",     "ground_truth", "authenticity",
    "language",   "structure", "modality",     "formatting",
};

constexpr std::string_view kCheckMarkers[] = {
    "Problem Difficulty & Thematic Diversity Alignment",
    "Logical Consistency Alignment",
    "Ground Truth & Structure Alignment",
    "Problem Authenticity Alignment",
    "Language Consistency Alignment",
    "Problem Structure Consistency Alignment",
    "Modality Consistency Alignment",
    "Formatting Alignment",
};

constexpr std::string_view kBuiltinBody =
    "<Role_Start>\n"
    "To test the <Subject_Name: {subject_name}> reasoning and complex "
    "problem-solving skills of talented graduate students across various "
    "<Subject_Name: {subject_name}> disciplines, you, a <Persona_Role: "
    "{persona_role}> at a world-renowned institution, are creating a "
    "{difficulty_level} challenging problem.\n"
    "<Role_End>\n"
    "\n"
    "<Task_Description_Start>\n"
    "- You MUST refer to the following resources: <SUB> Subject_Name: "
    "{subject_name} Subdisciplines: {subdisciplines} <SUB>, <BC> Basic "
    "Concepts: {basic_concepts} <BC>.\n"
    "- You MUST randomly choose one or more items from the <SUB> Subject_Name: "
    "{subject_name} Subdisciplines: {subdisciplines} <SUB>, and then select "
    "several related concepts from the <BC> Basic Concepts: {basic_concepts} "
    "<BC> according to the subdisciplines to form an outline for the problem. "
    "Finally, create a calculation problem.\n"
    "- {reasoning_directive}\n"
    "<Task_Description_End>\n"
    "\n"
    "<Requirements_and_Expectations_Start>\n"
    "Note: The problem must satisfy the following self-alignment constraints:\n"
    "{constraint_sections}\n"
    "<Requirements_and_Expectations_End>";

std::string builtin_section(Check check) {
  switch (check) {
    case Check::difficulty:
      return "- Problem Difficulty & Thematic Diversity Alignment: Generate a "
             "highly complex, {difficulty_level} problem covering the given "
             "STEM topics, with difficulty benchmarked against top graduate "
             "exams and expert-level datasets.";
    case Check::logic:
      return "- Logical Consistency Alignment: Problem-solving must rely "
             "solely on rigorous reasoning or systematic derivation, avoiding "
             "pattern matching, heuristics, shortcuts, or fabrication. All "
             "intermediate steps require justification.";
    case Check::ground_truth:
      return "- Ground Truth & Structure Alignment: The answer must be a "
             "single, verifiable numerical value (a plain number, a number "
             "with a unit, or a ratio). Avoid hard-to-verify formats such as "
             "set operations or free text. For multi-solution problems, "
             "mandate a specific aggregation (e.g., \"calculate total moles "
             "of all possible products\") so the answer stays unique and "
             "objectively verifiable.";
    case Check::authenticity:
      return "- Problem Authenticity Alignment: The problem should be novel, "
             "based on authoritative knowledge, but not directly copied. It "
             "must be unambiguous, unbiased, accurate, and internally "
             "consistent, avoiding nonsensical or hallucinated scenarios.";
    case Check::language:
      return "- Language Consistency Alignment: The entire output (problem "
             "statement, reasoning, and solution presentation) must use a "
             "single language ({language_name}) to prevent multilingual "
             "confusion.";
    case Check::structure:
      return "- Problem Structure Consistency Alignment: The problem must "
             "contain only a single primary question, avoiding sub-questions, "
             "derivatives, or branching logic.";
    case Check::modality:
      return "- Modality Consistency Alignment: The problem must be strictly "
             "text-based, describing any necessary complex structures (e.g., "
             "chemical molecules, genetic diagrams) textually.";
    case Check::formatting:
      return "- Formatting Alignment: Wrap the problem statement between "
             "{question_open} and {question_close}, then give the reasoning, "
             "and put the final answer on the last line in the standardized "
             "format {answer_format}.";
  }
  throw InvalidConstraint("unknown check");
}

std::string difficulty_display(std::string_view tag) {
  if (tag == "graduate-or-olympiad") return "graduate- or Olympiad-level";
  return std::string(tag);
}

std::string language_display(std::string_view tag) {
  if (tag == "en") return "English";
  if (tag == "zh") return "Chinese";
  if (tag == "fr") return "French";
  if (tag == "de") return "German";
  if (tag == "es") return "Spanish";
  if (tag == "ja") return "Japanese";
  return std::string(tag);
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

/// Single left-to-right pass: `{identifier}` is replaced from `bindings`
/// (replacements are not rescanned); any other brace content is copied
/// verbatim.
std::string render_placeholders(std::string_view text,
                                const std::map<std::string, std::string>& bindings,
                                std::string_view context) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{') {
      out.push_back(text[i]);
      continue;
    }
    std::size_t j = i + 1;
    if (j < text.size() &&
        (std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
      std::size_t k = j + 1;
      while (k < text.size() && is_ident_char(text[k])) ++k;
      if (k < text.size() && text[k] == '}') {
        const std::string name(text.substr(j, k - j));
        auto it = bindings.find(name);
        if (it == bindings.end()) {
          throw MissingPlaceholder("no binding for placeholder '{" + name +
                                   "}' in " + std::string(context));
        }
        out += it->second;
        i = k;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

}  // namespace

std::string_view check_name(Check check) {
  return kCheckNames[static_cast<std::size_t>(check)];
}

std::optional<Check> check_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kAllChecks.size(); ++i) {
    if (kCheckNames[i] == name) return kAllChecks[i];
  }
  return std::nullopt;
}

std::size_t CheckSet::size() const {
  std::size_t n = 0;
  for (Check c : kAllChecks) {
    if (contains(c)) ++n;
  }
  return n;
}

std::string_view check_marker(Check check) {
  return kCheckMarkers[static_cast<std::size_t>(check)];
}

void AlignmentConstraintSet::validate() const {
  if (trim(question_open).empty() || trim(question_close).empty()) {
    throw ConfigError("question delimiters must be nonempty");
  }
  if (question_open == question_close) {
    throw ConfigError("question delimiters must be distinct");
  }
  if (question_open.find(question_close) != std::string::npos) {
    throw ConfigError("close delimiter must not be a substring of the open delimiter");
  }
  if (trim(answer_marker).empty()) {
    throw ConfigError("answer marker must be nonempty");
  }
}

std::string ReasoningSpec::directive() const {
  switch (mode) {
    case Mode::step_by_step:
      return "Reason step by step: lay out every deduction explicitly and in "
             "order, justifying each step by established theory, before "
             "stating the final answer.";
    case Mode::propose_verify:
      return "Use a propose-and-verify process: propose each reasoning step, "
             "verify it independently for validity and truthfulness, and only "
             "keep steps that survive verification before stating the final "
             "answer.";
  }
  throw ConfigError("unknown reasoning mode");
}

std::string_view ReasoningSpec::name() const {
  return mode == Mode::step_by_step ? "step_by_step" : "propose_verify";
}

ReasoningSpec ReasoningSpec::from_name(std::string_view name) {
  if (name == "step_by_step") return ReasoningSpec{Mode::step_by_step};
  if (name == "propose_verify") return ReasoningSpec{Mode::propose_verify};
  throw ConfigError("unknown reasoning mode: '" + std::string(name) + "'");
}

PromptTemplate PromptTemplate::builtin() {
  PromptTemplate t;
  t.body = std::string(kBuiltinBody);
  for (Check c : kAllChecks) t.sections[c] = builtin_section(c);
  t.hash = hex64(fnv1a64(t.serialize()));
  return t;
}

std::string PromptTemplate::serialize() const {
  std::string out = "[template]\n";
  out += body;
  out += '\n';
  for (const auto& [check, text] : sections) {
    out += "[section ";
    out += check_name(check);
    out += "]\n";
    out += text;
    out += '\n';
  }
  return out;
}

PromptTemplate PromptTemplate::parse(std::string_view text,
                                     std::string_view source_name) {
  PromptTemplate t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string* target = nullptr;
  std::string current;
  std::size_t lineno = 0;
  bool saw_template = false;

  auto flush = [&] {
    if (target != nullptr) {
      if (!current.empty() && current.back() == '\n') current.pop_back();
      *target = current;
    }
    current.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line == "[template]") {
      flush();
      saw_template = true;
      target = &t.body;
      continue;
    }
    if (line.starts_with("[section ") && line.ends_with("]")) {
      flush();
      const std::string name = line.substr(9, line.size() - 10);
      auto check = check_from_name(name);
      if (!check) {
        throw SchemaError(std::string(source_name) + ":" + std::to_string(lineno) +
                          ": unknown constraint section '" + name + "'");
      }
      target = &t.sections[*check];
      continue;
    }
    if (target == nullptr) {
      if (trim(line).empty()) continue;
      throw SchemaError(std::string(source_name) + ":" + std::to_string(lineno) +
                        ": content before [template] header");
    }
    current += line;
    current += '\n';
  }
  flush();
  if (!saw_template) {
    throw SchemaError(std::string(source_name) + ": missing [template] header");
  }
  t.hash = hex64(fnv1a64(t.serialize()));
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open template file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

PromptInstance instantiate_prompt(const taxonomy::SeedSelection& seed,
                                  const PersonaRole& persona,
                                  const AlignmentConstraintSet& constraints,
                                  const ReasoningSpec& reasoning,
                                  const PromptTemplate& tmpl) {
  constraints.validate();
  const std::string persona_text = trim(persona.description);
  if (persona_text.empty()) throw ConfigError("persona description is empty");
  if (trim(seed.subject).empty()) throw ConfigError("seed selection has no subject");
  if (seed.chosen_subdisciplines.empty() || seed.chosen_concepts.empty()) {
    throw ConfigError("seed selection subsets must be nonempty");
  }

  auto join = [](const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += items[i];
    }
    return out;
  };

  std::map<std::string, std::string> bindings = {
      {"subject_name", seed.subject},
      {"subdisciplines", join(seed.chosen_subdisciplines)},
      {"basic_concepts", join(seed.chosen_concepts)},
      {"persona_role", persona_text},
      {"reasoning_directive", reasoning.directive()},
      {"difficulty_level", difficulty_display(constraints.difficulty_level)},
      {"language_name", language_display(constraints.language)},
      {"question_open", constraints.question_open},
      {"question_close", constraints.question_close},
      {"answer_format", constraints.answer_format_display()},
  };

  std::string sections;
  for (Check c : kAllChecks) {
    if (!constraints.enabled.contains(c)) continue;
    auto it = tmpl.sections.find(c);
    if (it == tmpl.sections.end() || trim(it->second).empty()) {
      throw InvalidConstraint("enabled check '" + std::string(check_name(c)) +
                              "' has no template section");
    }
    if (!sections.empty()) sections += '\n';
    sections += render_placeholders(it->second, bindings,
                                    "section '" + std::string(check_name(c)) + "'");
  }
  bindings["constraint_sections"] = sections;

  PromptInstance instance;
  instance.text = render_placeholders(tmpl.body, bindings, "template body");
  instance.seed = seed;
  instance.persona = PersonaRole{persona_text};
  instance.constraints = constraints;
  instance.reasoning = reasoning;
  instance.template_hash = tmpl.hash;
  instance.id = hex64(fnv1a64(instance.text));
  return instance;
}

std::vector<PersonaRole> load_personas(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open persona file: " + path.string());
  std::vector<PersonaRole> personas;
  std::string line;
  while (std::getline(in, line)) {
    std::string text = trim(line);
    if (text.empty()) continue;
    personas.push_back(PersonaRole{std::move(text)});
  }
  if (personas.empty()) throw SchemaError("persona file has no entries: " + path.string());
  return personas;
}

std::vector<PersonaRole> builtin_personas() {
  return {
      PersonaRole{"theoretical physicist specializing in quantum mechanics and high energy physics"},
      PersonaRole{"organic chemist focused on reaction mechanisms and stereochemistry"},
      PersonaRole{"molecular biologist studying gene regulation and virology"},
      PersonaRole{"condensed matter physicist working on semiconductor devices"},
      PersonaRole{"analytical chemist expert in spectroscopy and titration methods"},
      PersonaRole{"geneticist investigating inheritance patterns and population genetics"},
      PersonaRole{"astrophysicist modelling stellar evolution and compact objects"},
      PersonaRole{"biochemist specializing in enzyme kinetics and metabolic pathways"},
      PersonaRole{"electrical engineer designing analog circuits and signal processing systems"},
      PersonaRole{"applied mathematician working on differential equations and numerical methods"},
  };
}

}  // namespace sharp::promptgen
