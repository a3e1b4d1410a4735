#include "sharp/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "sharp/errors.hpp"
#include "sharp/hashing.hpp"
#include "sharp/rng.hpp"
#include "sharp/textutil.hpp"

namespace sharp::pipeline {

namespace {

using nlohmann::json;

// ---- small file helpers -------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

json parse_line(const std::string& line, const std::filesystem::path& path,
                std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ":" + std::to_string(lineno) +
                      ": invalid JSON: " + e.what());
  }
}

// ---- item (de)serialization -----------------------------------------------------

json meta_to_json(const PipelineItem& item) {
  json j;
  j["prompt_id"] = item.prompt_id;
  j["subject"] = item.subject;
  j["subdisciplines"] = item.subdisciplines;
  j["concepts"] = item.concepts;
  j["persona"] = item.persona;
  j["template_hash"] = item.template_hash;
  return j;
}

void meta_from_json(const json& j, PipelineItem& item) {
  item.prompt_id = j.at("prompt_id").get<std::string>();
  item.subject = j.at("subject").get<std::string>();
  item.subdisciplines = j.at("subdisciplines").get<std::vector<std::string>>();
  item.concepts = j.at("concepts").get<std::vector<std::string>>();
  item.persona = j.at("persona").get<std::string>();
  item.template_hash = j.at("template_hash").get<std::string>();
}

json counts_to_json(const StageCounts& counts) {
  json j;
  j["planned"] = counts.planned;
  j["generated"] = counts.generated;
  j["generation_failed"] = counts.generation_failed;
  j["parse_failed"] = counts.parse_failed;
  j["verify_failed"] = counts.verify_failed;
  j["verify_failed_by_check"] = counts.verify_failed_by_check;
  j["dedup_exact"] = counts.dedup_exact;
  j["dedup_near"] = counts.dedup_near;
  j["detoxified"] = counts.detoxified;
  j["decontaminated"] = counts.decontaminated;
  j["sampled_out"] = counts.sampled_out;
  j["band_filtered"] = counts.band_filtered;
  j["emit_rejected"] = counts.emit_rejected;
  j["final"] = counts.final_kept;
  return j;
}

StageCounts counts_from_json(const json& j) {
  StageCounts c;
  c.planned = j.value("planned", std::int64_t{0});
  c.generated = j.value("generated", std::int64_t{0});
  c.generation_failed = j.value("generation_failed", std::int64_t{0});
  c.parse_failed = j.value("parse_failed", std::int64_t{0});
  c.verify_failed = j.value("verify_failed", std::int64_t{0});
  if (j.contains("verify_failed_by_check")) {
    c.verify_failed_by_check =
        j.at("verify_failed_by_check").get<std::map<std::string, std::int64_t>>();
  }
  c.dedup_exact = j.value("dedup_exact", std::int64_t{0});
  c.dedup_near = j.value("dedup_near", std::int64_t{0});
  c.detoxified = j.value("detoxified", std::int64_t{0});
  c.decontaminated = j.value("decontaminated", std::int64_t{0});
  c.sampled_out = j.value("sampled_out", std::int64_t{0});
  c.band_filtered = j.value("band_filtered", std::int64_t{0});
  c.emit_rejected = j.value("emit_rejected", std::int64_t{0});
  c.final_kept = j.value("final", std::int64_t{0});
  return c;
}

std::string outcome_name(verifier::CheckOutcome outcome) {
  switch (outcome) {
    case verifier::CheckOutcome::pass:
      return "pass";
    case verifier::CheckOutcome::fail:
      return "fail";
    case verifier::CheckOutcome::skipped:
      return "skipped";
  }
  return "skipped";
}

json report_to_json(const verifier::VerificationReport& report) {
  json checks = json::object();
  for (const auto& [check, result] : report.checks) {
    json entry;
    entry["outcome"] = outcome_name(result.outcome);
    if (!result.reason.empty()) entry["reason"] = result.reason;
    checks[std::string(promptgen::check_name(check))] = entry;
  }
  json j;
  j["overall"] = report.overall;
  j["checks"] = checks;
  return j;
}

// ---- problem text ---------------------------------------------------------------

std::string subject_label(const std::string& subject) {
  std::string label = subject.substr(0, subject.find(','));
  return to_lower(trim(label));
}

}  // namespace

// ---- StageCounts ------------------------------------------------------------------

bool StageCounts::conservation_holds() const {
  return generated == final_kept + parse_failed + verify_failed + dedup_exact +
                          dedup_near + detoxified + decontaminated + sampled_out +
                          band_filtered + emit_rejected;
}

// ---- atomic write -----------------------------------------------------------------

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing file: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() +
                        ": " + ec.message());
}

// ---- RunConfig ---------------------------------------------------------------------

namespace {

const std::unordered_set<std::string>& known_config_keys() {
  static const std::unordered_set<std::string> keys = {
      "taxonomy_path", "persona_path", "template_path", "backend", "endpoint",
      "model", "n_problems", "rng_seed", "output_dir", "reasoning_mode",
      "benchmark_path", "blocklist_path", "stop_after",
      "temperature", "top_p", "max_tokens", "repetition_penalty",
      "context_length", "max_in_flight",
      "rel_tol", "abs_tol", "min_question_chars",
      "difficulty_level", "language", "question_open", "question_close",
      "answer_marker", "enabled_checks",
      "min_subdisciplines", "max_subdisciplines", "min_concepts", "max_concepts",
      "dedup_threshold", "ngram_n", "kmeans_k", "kmeans_grid", "budget",
      "enable_exact_dedup", "enable_near_dedup", "enable_detoxify",
      "enable_decontaminate", "enable_cluster_sample",
      "embedding_source", "embedding_path", "embedding_dim",
      "difficulty_enabled", "attempts_k", "attempts_path", "band_lo", "band_hi",
  };
  return keys;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["taxonomy_path"] = c.taxonomy_path;
  j["persona_path"] = c.persona_path;
  j["template_path"] = c.template_path;
  j["backend"] = c.backend;
  j["endpoint"] = c.endpoint;
  j["model"] = c.model;
  j["n_problems"] = c.n_problems;
  j["rng_seed"] = c.rng_seed;
  j["output_dir"] = c.output_dir;
  j["reasoning_mode"] = c.reasoning_mode;
  j["benchmark_path"] = c.benchmark_path;
  j["blocklist_path"] = c.blocklist_path;
  j["stop_after"] = c.stop_after;
  j["temperature"] = c.inference.temperature;
  j["top_p"] = c.inference.top_p;
  j["max_tokens"] = c.inference.max_tokens;
  j["repetition_penalty"] = c.inference.repetition_penalty;
  j["context_length"] = c.inference.context_length;
  j["max_in_flight"] = c.inference.max_in_flight;
  j["rel_tol"] = c.tolerances.rel;
  j["abs_tol"] = c.tolerances.abs;
  j["min_question_chars"] = c.min_question_chars;
  j["difficulty_level"] = c.constraints.difficulty_level;
  j["language"] = c.constraints.language;
  j["question_open"] = c.constraints.question_open;
  j["question_close"] = c.constraints.question_close;
  j["answer_marker"] = c.constraints.answer_marker;
  json checks = json::array();
  for (promptgen::Check check : promptgen::kAllChecks) {
    if (c.constraints.enabled.contains(check)) {
      checks.push_back(std::string(promptgen::check_name(check)));
    }
  }
  j["enabled_checks"] = checks;
  j["min_subdisciplines"] = c.sample_policy.min_subdisciplines;
  j["max_subdisciplines"] = c.sample_policy.max_subdisciplines;
  j["min_concepts"] = c.sample_policy.min_concepts;
  j["max_concepts"] = c.sample_policy.max_concepts;
  j["dedup_threshold"] = c.curation.dedup_threshold;
  j["ngram_n"] = c.curation.ngram;
  j["kmeans_k"] = c.curation.kmeans_k;
  j["kmeans_grid"] = c.curation.k_grid;
  j["budget"] = c.curation.budget;
  j["enable_exact_dedup"] = c.curation.enable_exact_dedup;
  j["enable_near_dedup"] = c.curation.enable_near_dedup;
  j["enable_detoxify"] = c.curation.enable_detoxify;
  j["enable_decontaminate"] = c.curation.enable_decontaminate;
  j["enable_cluster_sample"] = c.curation.enable_cluster_sample;
  j["embedding_source"] = c.embeddings.source;
  j["embedding_path"] = c.embeddings.sidecar_path;
  j["embedding_dim"] = c.embeddings.hash_dim;
  j["difficulty_enabled"] = c.difficulty.enabled;
  j["attempts_k"] = c.difficulty.attempts_k;
  j["attempts_path"] = c.difficulty.attempts_path;
  j["band_lo"] = c.difficulty.band_lo;
  j["band_hi"] = c.difficulty.band_hi;
  return j;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object of flat keys");

  for (const auto& [key, value] : j.items()) {
    if (!known_config_keys().count(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  RunConfig c;
  try {
    c.taxonomy_path = j.value("taxonomy_path", c.taxonomy_path);
    c.persona_path = j.value("persona_path", c.persona_path);
    c.template_path = j.value("template_path", c.template_path);
    c.backend = j.value("backend", c.backend);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.n_problems = j.value("n_problems", c.n_problems);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.reasoning_mode = j.value("reasoning_mode", c.reasoning_mode);
    c.benchmark_path = j.value("benchmark_path", c.benchmark_path);
    c.blocklist_path = j.value("blocklist_path", c.blocklist_path);
    c.stop_after = j.value("stop_after", c.stop_after);
    c.inference.temperature = j.value("temperature", c.inference.temperature);
    c.inference.top_p = j.value("top_p", c.inference.top_p);
    c.inference.max_tokens = j.value("max_tokens", c.inference.max_tokens);
    c.inference.repetition_penalty =
        j.value("repetition_penalty", c.inference.repetition_penalty);
    c.inference.context_length = j.value("context_length", c.inference.context_length);
    c.inference.max_in_flight = j.value("max_in_flight", c.inference.max_in_flight);
    c.tolerances.rel = j.value("rel_tol", c.tolerances.rel);
    c.tolerances.abs = j.value("abs_tol", c.tolerances.abs);
    c.min_question_chars = j.value("min_question_chars", c.min_question_chars);
    c.constraints.difficulty_level =
        j.value("difficulty_level", c.constraints.difficulty_level);
    c.constraints.language = j.value("language", c.constraints.language);
    c.constraints.question_open = j.value("question_open", c.constraints.question_open);
    c.constraints.question_close = j.value("question_close", c.constraints.question_close);
    c.constraints.answer_marker = j.value("answer_marker", c.constraints.answer_marker);
    if (j.contains("enabled_checks")) {
      promptgen::CheckSet enabled = promptgen::CheckSet::none();
      for (const auto& name : j.at("enabled_checks")) {
        auto check = promptgen::check_from_name(name.get<std::string>());
        if (!check) {
          throw ConfigError("unknown check '" + name.get<std::string>() +
                            "' in enabled_checks");
        }
        enabled.insert(*check);
      }
      c.constraints.enabled = enabled;
    }
    c.sample_policy.min_subdisciplines =
        j.value("min_subdisciplines", c.sample_policy.min_subdisciplines);
    c.sample_policy.max_subdisciplines =
        j.value("max_subdisciplines", c.sample_policy.max_subdisciplines);
    c.sample_policy.min_concepts = j.value("min_concepts", c.sample_policy.min_concepts);
    c.sample_policy.max_concepts = j.value("max_concepts", c.sample_policy.max_concepts);
    c.curation.dedup_threshold = j.value("dedup_threshold", c.curation.dedup_threshold);
    c.curation.ngram = j.value("ngram_n", c.curation.ngram);
    if (j.contains("kmeans_k")) {
      if (j.at("kmeans_k").is_string()) {
        const std::string v = j.at("kmeans_k").get<std::string>();
        if (v != "auto") throw ConfigError("kmeans_k must be an integer or \"auto\"");
        c.curation.kmeans_k = 0;
      } else {
        c.curation.kmeans_k = j.at("kmeans_k").get<std::size_t>();
      }
    }
    if (j.contains("kmeans_grid")) {
      c.curation.k_grid = j.at("kmeans_grid").get<std::vector<std::size_t>>();
    }
    c.curation.budget = j.value("budget", c.curation.budget);
    c.curation.enable_exact_dedup =
        j.value("enable_exact_dedup", c.curation.enable_exact_dedup);
    c.curation.enable_near_dedup =
        j.value("enable_near_dedup", c.curation.enable_near_dedup);
    c.curation.enable_detoxify = j.value("enable_detoxify", c.curation.enable_detoxify);
    c.curation.enable_decontaminate =
        j.value("enable_decontaminate", c.curation.enable_decontaminate);
    c.curation.enable_cluster_sample =
        j.value("enable_cluster_sample", c.curation.enable_cluster_sample);
    c.embeddings.source = j.value("embedding_source", c.embeddings.source);
    c.embeddings.sidecar_path = j.value("embedding_path", c.embeddings.sidecar_path);
    c.embeddings.hash_dim = j.value("embedding_dim", c.embeddings.hash_dim);
    c.difficulty.enabled = j.value("difficulty_enabled", c.difficulty.enabled);
    c.difficulty.attempts_k = j.value("attempts_k", c.difficulty.attempts_k);
    c.difficulty.attempts_path = j.value("attempts_path", c.difficulty.attempts_path);
    c.difficulty.band_lo = j.value("band_lo", c.difficulty.band_lo);
    c.difficulty.band_hi = j.value("band_hi", c.difficulty.band_hi);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  c.source_path = path.string();
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (taxonomy_path.empty()) throw ConfigError("taxonomy_path is required");
  if (!std::filesystem::exists(taxonomy_path)) {
    throw ConfigError("taxonomy_path does not exist: " + taxonomy_path);
  }
  for (const auto& [label, path] :
       std::initializer_list<std::pair<const char*, const std::string*>>{
           {"persona_path", &persona_path},
           {"template_path", &template_path},
           {"benchmark_path", &benchmark_path},
           {"blocklist_path", &blocklist_path},
           {"attempts_path", &difficulty.attempts_path},
           {"embedding_path", &embeddings.sidecar_path}}) {
    if (!path->empty() && !std::filesystem::exists(*path)) {
      throw ConfigError(std::string(label) + " does not exist: " + *path);
    }
  }
  if (backend != "mock" && backend != "http") {
    throw ConfigError("backend must be 'mock' or 'http'");
  }
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (stop_after != "" && stop_after != "generate" && stop_after != "verify") {
    throw ConfigError("stop_after must be '', 'generate', or 'verify'");
  }
  if (embeddings.source != "none" && embeddings.source != "sidecar" &&
      embeddings.source != "hash") {
    throw ConfigError("embedding_source must be 'none', 'sidecar', or 'hash'");
  }
  if (embeddings.source == "sidecar" && embeddings.sidecar_path.empty()) {
    throw ConfigError("embedding_source 'sidecar' needs embedding_path");
  }
  if (embeddings.source == "hash" && embeddings.hash_dim < 2) {
    throw ConfigError("embedding_dim must be >= 2 for the hash featurizer");
  }
  inference.validate();
  constraints.validate();
  if (tolerances.rel < 0 || tolerances.abs < 0) {
    throw ConfigError("tolerances must be >= 0");
  }
  if (!(curation.dedup_threshold > 0 && curation.dedup_threshold <= 1)) {
    throw ConfigError("dedup_threshold must be in (0, 1]");
  }
  if (curation.ngram < 1) throw ConfigError("ngram_n must be >= 1");
  if (difficulty.enabled && difficulty.attempts_k < 1) {
    throw ConfigError("attempts_k must be >= 1");
  }
  if (!(difficulty.band_lo >= 0 && difficulty.band_lo <= difficulty.band_hi &&
        difficulty.band_hi <= 1)) {
    throw ConfigError("band must satisfy 0 <= lo <= hi <= 1");
  }
  promptgen::ReasoningSpec::from_name(reasoning_mode);  // validates the name
}

std::string RunConfig::content_hash() const {
  json j = config_to_json(*this);
  // stop_after is operational (interrupt point), not run identity: a resumed
  // run must not drift just because the stop request was lifted
  j.erase("stop_after");
  return hex64(fnv1a64(j.dump()));
}

// ---- planning -----------------------------------------------------------------------

std::vector<promptgen::PromptInstance> plan_prompts(const RunConfig& config) {
  const taxonomy::Taxonomy tax = taxonomy::load_taxonomy(config.taxonomy_path);
  const auto personas = config.persona_path.empty()
                            ? promptgen::builtin_personas()
                            : promptgen::load_personas(config.persona_path);
  const auto tmpl = config.template_path.empty()
                        ? promptgen::PromptTemplate::builtin()
                        : promptgen::PromptTemplate::load(config.template_path);
  const auto reasoning = promptgen::ReasoningSpec::from_name(config.reasoning_mode);

  RandomEngine seed_rng(derive_seed(config.rng_seed, "seed-sampling"));
  RandomEngine persona_rng(derive_seed(config.rng_seed, "persona"));

  std::vector<promptgen::PromptInstance> prompts;
  prompts.reserve(config.n_problems);
  for (std::size_t i = 0; i < config.n_problems; ++i) {
    const std::uint64_t selection_seed = seed_rng.next();
    const taxonomy::SeedSelection selection =
        taxonomy::sample_seed(tax, selection_seed, config.sample_policy);
    const auto& persona =
        personas[static_cast<std::size_t>(persona_rng.bounded(personas.size()))];
    prompts.push_back(promptgen::instantiate_prompt(selection, persona,
                                                    config.constraints, reasoning, tmpl));
  }
  return prompts;
}

std::shared_ptr<inference::CompletionBackend> make_backend(const RunConfig& config) {
  if (config.backend == "mock") {
    return std::make_shared<inference::MockBackend>();
  }
  inference::HttpBackendConfig http = inference::HttpBackendConfig::from_env();
  if (!config.endpoint.empty()) http.base_url = config.endpoint;
  http.model = config.model;
  return std::make_shared<inference::HttpBackend>(http);
}

std::string render_problem_text(const std::string& subject, const std::string& question,
                                const promptgen::AlignmentConstraintSet& constraints) {
  const std::string fmt = constraints.answer_format_display();
  return "Solve the following " + subject_label(subject) +
         " problem step by step. The last line of your response should be of the "
         "form " +
         fmt + " (without quotes) where $Answer$ is the answer to the problem. " +
         question + " Remember to put your final answer within " + fmt + ".";
}

// ---- file schemas --------------------------------------------------------------------

void write_generations_file(const std::filesystem::path& path,
                            const std::vector<PipelineItem>& items) {
  std::string out;
  for (const auto& item : items) {
    json j = meta_to_json(item);
    json completion;
    completion["id"] = item.completion.id;
    completion["text"] = item.completion.text;
    completion["token_count"] = item.completion.token_count;
    completion["latency_ms"] = item.completion.latency_ms;
    completion["backend"] = item.completion.backend_name;
    j["completion"] = completion;
    out += j.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<PipelineItem> read_generations_file(const std::filesystem::path& path) {
  std::vector<PipelineItem> items;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const json j = parse_line(line, path, lineno);
    PipelineItem item;
    try {
      meta_from_json(j, item);
      const json& completion = j.at("completion");
      item.completion.prompt_id = item.prompt_id;
      item.completion.id = completion.at("id").get<std::string>();
      item.completion.text = completion.at("text").get<std::string>();
      item.completion.token_count = completion.at("token_count").get<std::int64_t>();
      item.completion.latency_ms = completion.at("latency_ms").get<std::int64_t>();
      item.completion.backend_name = completion.at("backend").get<std::string>();
    } catch (const json::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    items.push_back(std::move(item));
  }
  return items;
}

void write_verified_file(const std::filesystem::path& path,
                         const std::vector<PipelineItem>& items) {
  std::string out;
  for (const auto& item : items) {
    json j = meta_to_json(item);
    j["question"] = item.record.question;
    j["reasoning"] = item.record.reasoning;
    j["raw_answer"] = item.record.raw_answer;
    j["completion_ref"] = item.record.completion_ref;
    j["report_digest"] = item.report_digest;
    out += j.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<PipelineItem> read_verified_file(const std::filesystem::path& path) {
  std::vector<PipelineItem> items;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const json j = parse_line(line, path, lineno);
    PipelineItem item;
    try {
      meta_from_json(j, item);
      item.record.prompt_id = item.prompt_id;
      item.record.question = j.at("question").get<std::string>();
      item.record.reasoning = j.at("reasoning").get<std::string>();
      item.record.raw_answer = j.at("raw_answer").get<std::string>();
      item.record.completion_ref = j.at("completion_ref").get<std::string>();
      item.report.overall = true;  // only verified records are written
      item.report_digest = j.value("report_digest", std::string());
    } catch (const json::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    items.push_back(std::move(item));
  }
  return items;
}

void write_reports_file(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, verifier::VerificationReport>>& reports) {
  std::string out;
  for (const auto& [prompt_id, report] : reports) {
    json j = report_to_json(report);
    j["prompt_id"] = prompt_id;
    out += j.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

void write_dataset_file(const std::filesystem::path& path,
                        const std::vector<DatasetRecord>& records) {
  std::string out;
  for (const auto& record : records) {
    json meta;
    meta["subject"] = record.subject;
    meta["subdisciplines"] = record.subdisciplines;
    meta["concepts"] = record.concepts;
    meta["persona"] = record.persona;
    meta["prompt_id"] = record.prompt_id;
    meta["verification"] = record.verification_digest;
    if (record.pass_rate) meta["pass_rate"] = *record.pass_rate;
    if (record.cluster) meta["cluster"] = *record.cluster;
    json j;
    j["problem"] = record.problem;
    j["ref_answer"] = record.ref_answer;
    j["sharp_meta"] = meta;
    out += j.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<DatasetRecord> read_dataset_file(const std::filesystem::path& path) {
  std::vector<DatasetRecord> records;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const json j = parse_line(line, path, lineno);
    DatasetRecord record;
    try {
      record.problem = j.at("problem").get<std::string>();
      record.ref_answer = j.at("ref_answer").get<std::string>();
      const json& meta = j.at("sharp_meta");
      record.subject = meta.at("subject").get<std::string>();
      record.subdisciplines = meta.at("subdisciplines").get<std::vector<std::string>>();
      record.concepts = meta.at("concepts").get<std::vector<std::string>>();
      record.persona = meta.at("persona").get<std::string>();
      record.prompt_id = meta.at("prompt_id").get<std::string>();
      record.verification_digest = meta.at("verification").get<std::string>();
      if (meta.contains("pass_rate")) record.pass_rate = meta.at("pass_rate").get<double>();
      if (meta.contains("cluster")) record.cluster = meta.at("cluster").get<std::size_t>();
    } catch (const json::exception& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_stats_file(const std::filesystem::path& path, const RunStats& stats) {
  // stage timings stay out of this file: its bytes must be identical across
  // reruns of the same deterministic config
  json j;
  j["run_id"] = stats.run_id;
  j["config_hash"] = stats.config_hash;
  j["completed"] = stats.completed;
  j["stopped_after"] = stats.stopped_after;
  j["counts"] = counts_to_json(stats.counts);
  j["subjects"] = stats.subjects;
  atomic_write_file(path, j.dump(2) + "\n");
}

RunStats read_stats_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON: " + e.what());
  }
  RunStats stats;
  try {
    stats.run_id = j.at("run_id").get<std::string>();
    stats.config_hash = j.at("config_hash").get<std::string>();
    stats.completed = j.at("completed").get<bool>();
    stats.stopped_after = j.at("stopped_after").get<std::string>();
    stats.counts = counts_from_json(j.at("counts"));
    stats.subjects = j.at("subjects").get<std::map<std::string, std::int64_t>>();
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return stats;
}

// ---- run orchestration -----------------------------------------------------------

namespace {

class StageTimer {
public:
  StageTimer(RunStats& stats, std::string name)
      : stats_(stats), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start_);
    stats_.stage_ms[name_] += elapsed.count();
  }

private:
  RunStats& stats_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

struct LoadedCheckpoint {
  std::string config_path;
  std::string config_hash;
  std::string stage;
  StageCounts counts;
};

void write_checkpoint(const std::filesystem::path& path, const RunConfig& config,
                      const std::string& stage, const StageCounts& counts) {
  json j;
  j["version"] = 1;
  j["config_path"] = config.source_path;
  j["config_hash"] = config.content_hash();
  j["stage"] = stage;
  j["counts"] = counts_to_json(counts);
  json files;
  files["generations"] = "generations.jsonl";
  files["verified"] = "verified.jsonl";
  files["reports"] = "reports.jsonl";
  j["files"] = files;
  atomic_write_file(path, j.dump(2) + "\n");
}

LoadedCheckpoint read_checkpoint(const std::filesystem::path& path) {
  std::string content;
  try {
    content = read_file(path);
  } catch (const IoError& e) {
    throw CorruptCheckpoint(e.what());
  }
  json j;
  try {
    j = json::parse(content);
  } catch (const json::parse_error& e) {
    throw CorruptCheckpoint(path.string() + ": invalid JSON: " + e.what());
  }
  LoadedCheckpoint cp;
  try {
    cp.config_path = j.at("config_path").get<std::string>();
    cp.config_hash = j.at("config_hash").get<std::string>();
    cp.stage = j.at("stage").get<std::string>();
    cp.counts = counts_from_json(j.at("counts"));
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(path.string() + ": " + e.what());
  }
  return cp;
}

std::vector<curation::RecordView> record_views(const std::vector<PipelineItem>& items) {
  std::vector<curation::RecordView> views;
  views.reserve(items.size());
  for (const auto& item : items) {
    views.push_back(curation::RecordView{item.prompt_id, item.record.question});
  }
  return views;
}

void keep_only(std::vector<PipelineItem>& items, const std::vector<std::string>& kept_ids,
               std::int64_t& dropped_counter) {
  std::unordered_set<std::string> keep(kept_ids.begin(), kept_ids.end());
  std::vector<PipelineItem> next;
  next.reserve(kept_ids.size());
  for (auto& item : items) {
    if (keep.count(item.prompt_id)) {
      next.push_back(std::move(item));
    } else {
      ++dropped_counter;
    }
  }
  items = std::move(next);
}

std::vector<std::string> nonempty_lines(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for (auto& line : read_lines(path)) {
    std::string t = trim(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::size_t> default_elbow_grid(std::size_t n) {
  std::vector<std::size_t> grid;
  for (std::size_t k = 1; k <= std::max<std::size_t>(n / 2, 1); k *= 2) {
    grid.push_back(k);
  }
  return grid;
}

constexpr std::string_view kFinalAnswerInstruction = "put your final answer within";

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

RunResult run_stages(const RunConfig& config,
                     std::shared_ptr<inference::CompletionBackend> backend_override,
                     int start_stage, std::vector<PipelineItem> items,
                     StageCounts initial_counts) {
  config.validate();
  const std::filesystem::path outdir = config.output_dir;
  std::filesystem::create_directories(outdir);
  const std::filesystem::path checkpoint_path = outdir / "checkpoint.json";

  RunStats stats;
  stats.counts = initial_counts;
  stats.config_hash = config.content_hash();
  stats.run_id = stats.config_hash;

  RunResult result;
  result.checkpoint_path = checkpoint_path;
  result.dataset_path = outdir / "dataset.jsonl";
  result.stats_path = outdir / "stats.json";
  result.report_path = outdir / "report.txt";

  // only name the checkpoint in failures once it exists on disk
  auto resumable_ref = [&checkpoint_path] {
    return std::filesystem::exists(checkpoint_path) ? checkpoint_path.string()
                                                    : std::string();
  };

  auto backend = backend_override ? std::move(backend_override) : make_backend(config);

  // -- generate --
  if (start_stage <= 0) {
    StageTimer timer(stats, "generate");
    try {
      const auto prompts = plan_prompts(config);
      stats.counts.planned = static_cast<std::int64_t>(prompts.size());
      inference::GenerationEngine engine(backend, config.inference);
      auto outcomes = engine.generate_all(prompts);
      for (std::size_t i = 0; i < prompts.size(); ++i) {
        if (!outcomes[i].completion) {
          ++stats.counts.generation_failed;
          continue;
        }
        PipelineItem item;
        // ids are qualified by position so repeated selections stay distinct
        item.prompt_id = hex64(fnv1a64(prompts[i].id + "#" + std::to_string(i)));
        item.subject = prompts[i].seed.subject;
        item.subdisciplines = prompts[i].seed.chosen_subdisciplines;
        item.concepts = prompts[i].seed.chosen_concepts;
        item.persona = prompts[i].persona.description;
        item.template_hash = prompts[i].template_hash;
        item.completion = std::move(*outcomes[i].completion);
        item.completion.prompt_id = item.prompt_id;
        items.push_back(std::move(item));
      }
      stats.counts.generated = static_cast<std::int64_t>(items.size());
      write_generations_file(outdir / "generations.jsonl", items);
      write_checkpoint(checkpoint_path, config, "generate", stats.counts);
    } catch (const ConfigError&) {
      throw;
    } catch (const StageFailure&) {
      throw;
    } catch (const Error& e) {
      throw StageFailure("generate", resumable_ref(), e.what());
    }
    if (config.stop_after == "generate") {
      stats.stopped_after = "generate";
      result.stats = std::move(stats);
      return result;
    }
  }

  // -- parse + verify --
  if (start_stage <= 1) {
    StageTimer timer(stats, "verify");
    try {
      verifier::AlignmentCheckOptions options;
      options.min_question_chars = config.min_question_chars;

      std::vector<PipelineItem> verified;
      std::vector<std::pair<std::string, verifier::VerificationReport>> reports;
      verified.reserve(items.size());
      reports.reserve(items.size());
      for (auto& item : items) {
        inference::GenerationRecord record;
        try {
          record = inference::parse_generation(item.completion, config.constraints);
        } catch (const Error& e) {
          ++stats.counts.parse_failed;
          verifier::VerificationReport failed;
          for (promptgen::Check c : promptgen::kAllChecks) {
            failed.checks[c] = verifier::CheckResult{verifier::CheckOutcome::skipped,
                                                     std::string("parse failed: ") + e.what()};
          }
          failed.overall = false;
          reports.emplace_back(item.prompt_id, std::move(failed));
          continue;
        }
        verifier::VerificationReport report =
            verifier::check_alignment(record, config.constraints, options);
        reports.emplace_back(item.prompt_id, report);
        if (!report.overall) {
          ++stats.counts.verify_failed;
          for (promptgen::Check c : promptgen::kAllChecks) {
            if (config.constraints.enabled.contains(c) &&
                report.checks[c].outcome == verifier::CheckOutcome::fail) {
              ++stats.counts.verify_failed_by_check[std::string(promptgen::check_name(c))];
              break;  // attribute the record to its first failing check
            }
          }
          continue;
        }
        item.record = std::move(record);
        item.report_digest = report.digest();
        item.report = std::move(report);
        verified.push_back(std::move(item));
      }
      items = std::move(verified);
      write_verified_file(outdir / "verified.jsonl", items);
      write_reports_file(outdir / "reports.jsonl", reports);
      write_checkpoint(checkpoint_path, config, "verify", stats.counts);
    } catch (const ConfigError&) {
      throw;
    } catch (const StageFailure&) {
      throw;
    } catch (const Error& e) {
      throw StageFailure("verify", resumable_ref(), e.what());
    }
    if (config.stop_after == "verify") {
      stats.stopped_after = "verify";
      result.stats = std::move(stats);
      return result;
    }
  }

  // -- curate --
  {
    StageTimer timer(stats, "curate");
    try {
      std::optional<curation::EmbeddingSet> embeddings;
      if (config.embeddings.source == "sidecar") {
        embeddings = curation::load_embeddings(config.embeddings.sidecar_path);
      } else if (config.embeddings.source == "hash") {
        curation::EmbeddingSet set;
        set.dim = config.embeddings.hash_dim;
        for (const auto& item : items) {
          set.vectors.emplace_back(item.prompt_id,
                                   curation::hash_embedding(item.record.question, set.dim));
        }
        embeddings = std::move(set);
      }

      if (config.curation.enable_exact_dedup) {
        std::unordered_set<std::string> seen;
        std::vector<PipelineItem> next;
        next.reserve(items.size());
        for (auto& item : items) {
          if (seen.insert(collapse_whitespace(item.record.question)).second) {
            next.push_back(std::move(item));
          } else {
            ++stats.counts.dedup_exact;
          }
        }
        items = std::move(next);
      }

      if (config.curation.enable_near_dedup && embeddings && !items.empty()) {
        const auto kept = curation::dedup(record_views(items), *embeddings,
                                          config.curation.dedup_threshold);
        keep_only(items, kept, stats.counts.dedup_near);
      }

      if (config.curation.enable_detoxify && !config.blocklist_path.empty() &&
          !items.empty()) {
        const auto kept =
            curation::detoxify(record_views(items), nonempty_lines(config.blocklist_path));
        keep_only(items, kept, stats.counts.detoxified);
      }

      if (config.curation.enable_decontaminate && !config.benchmark_path.empty() &&
          !items.empty()) {
        const auto kept = curation::decontaminate(
            record_views(items), nonempty_lines(config.benchmark_path), config.curation.ngram);
        keep_only(items, kept, stats.counts.decontaminated);
      }

      if (config.curation.enable_cluster_sample && embeddings && !items.empty()) {
        curation::EmbeddingSet subset;
        subset.dim = embeddings->dim;
        for (const auto& item : items) {
          const auto* vec = embeddings->find(item.prompt_id);
          if (vec == nullptr) {
            throw MissingEmbedding("record '" + item.prompt_id + "' has no embedding vector");
          }
          subset.vectors.emplace_back(item.prompt_id, *vec);
        }
        std::size_t k = std::min(config.curation.kmeans_k, items.size());
        if (k == 0) {
          std::vector<std::size_t> grid =
              config.curation.k_grid.empty() ? default_elbow_grid(items.size())
                                             : config.curation.k_grid;
          std::erase_if(grid, [&](std::size_t g) { return g < 1 || g > items.size(); });
          if (grid.size() >= 3) {
            k = curation::choose_k_elbow(subset, grid, derive_seed(config.rng_seed, "elbow"));
          } else {
            k = std::min<std::size_t>(items.size(), 2);
          }
        }
        const auto assignment =
            curation::kmeans(subset, k, derive_seed(config.rng_seed, "kmeans"));
        for (std::size_t i = 0; i < items.size(); ++i) {
          items[i].cluster = assignment.labels[i];
        }
        if (config.curation.budget > 0 && config.curation.budget < items.size()) {
          const auto kept = curation::balanced_sample(assignment, config.curation.budget,
                                                      derive_seed(config.rng_seed, "sample"));
          keep_only(items, kept, stats.counts.sampled_out);
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const StageFailure&) {
      throw;
    } catch (const Error& e) {
      throw StageFailure("curate", resumable_ref(), e.what());
    }
  }

  // -- grade --
  if (config.difficulty.enabled) {
    StageTimer timer(stats, "grade");
    try {
      std::unordered_map<std::string, difficulty::AttemptSet> attempt_map;
      const bool file_mode = !config.difficulty.attempts_path.empty();
      if (file_mode) {
        std::size_t lineno = 0;
        for (const auto& line : read_lines(config.difficulty.attempts_path)) {
          ++lineno;
          if (trim(line).empty()) continue;
          const json j = parse_line(line, config.difficulty.attempts_path, lineno);
          difficulty::AttemptSet set;
          set.record_id = j.at("id").get<std::string>();
          set.attempts = j.at("attempts").get<std::vector<std::string>>();
          attempt_map[set.record_id] = std::move(set);
        }
      }
      for (auto& item : items) {
        difficulty::AttemptSet attempts;
        attempts.record_id = item.prompt_id;
        if (file_mode) {
          auto it = attempt_map.find(item.prompt_id);
          if (it == attempt_map.end()) continue;  // ungraded records stay
          attempts = it->second;
        } else {
          promptgen::PromptInstance attempt_prompt;
          attempt_prompt.text =
              render_problem_text(item.subject, item.record.question, config.constraints);
          attempt_prompt.id = item.prompt_id;
          for (std::size_t j = 0; j < config.difficulty.attempts_k; ++j) {
            const auto completion =
                inference::generate(*backend, attempt_prompt, config.inference);
            std::string answer;
            try {
              answer = verifier::extract_boxed(completion.text, config.constraints.answer_marker);
            } catch (const Error&) {
              answer = completion.text;  // unextractable attempts count as wrong
            }
            attempts.attempts.push_back(std::move(answer));
          }
        }
        if (attempts.attempts.empty()) continue;
        item.rate = difficulty::compute_pass_rate(
            verifier::parse_answer(item.record.raw_answer), attempts, config.tolerances);
      }
      const bool band_active = config.difficulty.band_lo > 0.0 || config.difficulty.band_hi < 1.0;
      if (band_active) {
        std::vector<PipelineItem> next;
        next.reserve(items.size());
        for (auto& item : items) {
          if (item.rate) {
            const double v = item.rate->value();
            if (v < config.difficulty.band_lo || v > config.difficulty.band_hi) {
              ++stats.counts.band_filtered;
              continue;
            }
          }
          next.push_back(std::move(item));
        }
        items = std::move(next);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const StageFailure&) {
      throw;
    } catch (const Error& e) {
      throw StageFailure("grade", resumable_ref(), e.what());
    }
  }

  // -- emit --
  {
    StageTimer timer(stats, "emit");
    try {
      std::vector<DatasetRecord> records;
      records.reserve(items.size());
      for (const auto& item : items) {
        DatasetRecord record;
        record.problem =
            render_problem_text(item.subject, item.record.question, config.constraints);
        record.ref_answer =
            config.constraints.answer_marker + "{" + item.record.raw_answer + "}";
        record.subject = item.subject;
        record.subdisciplines = item.subdisciplines;
        record.concepts = item.concepts;
        record.persona = item.persona;
        record.prompt_id = item.prompt_id;
        record.verification_digest = item.report_digest;
        if (item.rate) record.pass_rate = item.rate->value();
        record.cluster = item.cluster;

        // emitted records must re-verify and carry exactly one final-answer
        // instruction
        bool ok = count_occurrences(record.problem, kFinalAnswerInstruction) == 1;
        if (ok) {
          try {
            const std::string payload =
                verifier::extract_boxed(record.ref_answer, config.constraints.answer_marker);
            ok = verifier::parse_answer(payload).kind != verifier::AnswerKind::literal;
          } catch (const Error&) {
            ok = false;
          }
        }
        if (!ok) {
          ++stats.counts.emit_rejected;
          continue;
        }
        ++stats.subjects[record.subject];
        records.push_back(std::move(record));
      }
      stats.counts.final_kept = static_cast<std::int64_t>(records.size());
      if (!stats.counts.conservation_holds()) {
        throw StageFailure("emit", checkpoint_path.string(),
                           "conservation identity violated (generated != final + rejections)");
      }
      write_dataset_file(result.dataset_path, records);
      stats.completed = true;
      write_stats_file(result.stats_path, stats);
      json timings;
      timings["stage_ms"] = stats.stage_ms;
      atomic_write_file(outdir / "timings.json", timings.dump(2) + "\n");
      atomic_write_file(result.report_path, emit_report(stats));
      write_checkpoint(checkpoint_path, config, "final", stats.counts);
      result.records = std::move(records);
    } catch (const ConfigError&) {
      throw;
    } catch (const StageFailure&) {
      throw;
    } catch (const Error& e) {
      throw StageFailure("emit", resumable_ref(), e.what());
    }
  }

  result.stats = std::move(stats);
  return result;
}

}  // namespace

RunResult run_pipeline(const RunConfig& config,
                       std::shared_ptr<inference::CompletionBackend> backend_override) {
  return run_stages(config, std::move(backend_override), 0, {}, StageCounts{});
}

RunResult resume_run(const std::filesystem::path& checkpoint_path,
                     std::shared_ptr<inference::CompletionBackend> backend_override) {
  const LoadedCheckpoint cp = read_checkpoint(checkpoint_path);
  RunConfig config;
  try {
    config = RunConfig::load(cp.config_path);
  } catch (const ConfigError& e) {
    throw ConfigDrift("config at '" + cp.config_path +
                      "' no longer matches the checkpointed run: " + e.what());
  }
  if (config.content_hash() != cp.config_hash) {
    throw ConfigDrift("config hash " + config.content_hash() +
                      " differs from checkpointed " + cp.config_hash);
  }
  const std::filesystem::path outdir = config.output_dir;

  if (cp.stage == "final") {
    RunResult result;
    result.checkpoint_path = checkpoint_path;
    result.dataset_path = outdir / "dataset.jsonl";
    result.stats_path = outdir / "stats.json";
    result.report_path = outdir / "report.txt";
    try {
      result.stats = read_stats_file(result.stats_path);
      result.records = read_dataset_file(result.dataset_path);
    } catch (const Error& e) {
      throw CorruptCheckpoint(std::string("completed run artifacts unreadable: ") + e.what());
    }
    return result;
  }

  std::vector<PipelineItem> items;
  int start_stage = 0;
  try {
    if (cp.stage == "generate") {
      items = read_generations_file(outdir / "generations.jsonl");
      start_stage = 1;
    } else if (cp.stage == "verify") {
      items = read_verified_file(outdir / "verified.jsonl");
      start_stage = 2;
    } else {
      throw CorruptCheckpoint("unknown checkpoint stage '" + cp.stage + "'");
    }
  } catch (const CorruptCheckpoint&) {
    throw;
  } catch (const Error& e) {
    throw CorruptCheckpoint(std::string("checkpointed artifacts unreadable: ") + e.what());
  }
  return run_stages(config, std::move(backend_override), start_stage, std::move(items),
                    cp.counts);
}

std::string emit_report(const RunStats& stats) {
  std::ostringstream out;
  out << "SHARP run report\n";
  out << "================\n";
  out << "run id:      " << stats.run_id << "\n";
  out << "config hash: " << stats.config_hash << "\n";
  out << "status:      "
      << (stats.completed ? "completed"
                          : (stats.stopped_after.empty()
                                 ? "incomplete"
                                 : "stopped after " + stats.stopped_after))
      << "\n\n";

  const StageCounts& c = stats.counts;
  out << "stage funnel:\n";
  auto row = [&](const char* label, std::int64_t value) {
    out << "  " << label;
    for (std::size_t pad = std::string(label).size(); pad < 22; ++pad) out << ' ';
    out << value << "\n";
  };
  row("planned", c.planned);
  row("generated", c.generated);
  row("generation failed", c.generation_failed);
  row("parse failed", c.parse_failed);
  row("verify failed", c.verify_failed);
  for (const auto& [check, count] : c.verify_failed_by_check) {
    out << "    - " << check << ": " << count << "\n";
  }
  row("exact duplicates", c.dedup_exact);
  row("near duplicates", c.dedup_near);
  row("detoxified", c.detoxified);
  row("decontaminated", c.decontaminated);
  row("sampled out", c.sampled_out);
  row("band filtered", c.band_filtered);
  row("emit rejected", c.emit_rejected);
  row("final", c.final_kept);
  out << "conservation identity: " << (c.conservation_holds() ? "holds" : "VIOLATED")
      << "\n\n";

  out << "subjects:\n";
  std::int64_t total = 0;
  for (const auto& [subject, count] : stats.subjects) total += count;
  if (total == 0) {
    out << "  (none)\n";
  } else {
    for (const auto& [subject, count] : stats.subjects) {
      char pct[32];
      std::snprintf(pct, sizeof(pct), "%.1f%%",
                    100.0 * static_cast<double>(count) / static_cast<double>(total));
      out << "  " << subject << ": " << count << " (" << pct << ")\n";
    }
  }

  if (!stats.stage_ms.empty()) {
    out << "\nstage timings (ms):\n";
    for (const auto& [stage, ms] : stats.stage_ms) {
      out << "  " << stage << ": " << ms << "\n";
    }
  }
  return out.str();
}

}  // namespace sharp::pipeline
