#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sharp/alignment.hpp"
#include "sharp/curation.hpp"
#include "sharp/difficulty.hpp"
#include "sharp/inference.hpp"
#include "sharp/promptgen.hpp"
#include "sharp/taxonomy.hpp"
#include "sharp/verifier.hpp"

namespace sharp::pipeline {

struct CurationConfig {
  double dedup_threshold = 0.95;
  std::size_t ngram = 13;
  std::size_t kmeans_k = 0;  // 0 = choose via elbow rule
  std::vector<std::size_t> k_grid;  // optional explicit elbow grid
  std::size_t budget = 0;    // 0 = keep everything
  bool enable_exact_dedup = true;
  bool enable_near_dedup = true;
  bool enable_detoxify = true;
  bool enable_decontaminate = true;
  bool enable_cluster_sample = true;
};

struct DifficultyConfig {
  bool enabled = false;
  std::size_t attempts_k = 5;
  std::string attempts_path;  // empty = query the run backend k times
  double band_lo = 0.0;
  double band_hi = 1.0;
};

struct EmbeddingConfig {
  std::string source = "hash";  // none | sidecar | hash
  std::string sidecar_path;
  std::size_t hash_dim = 64;
};

struct RunConfig {
  std::string taxonomy_path;
  std::string persona_path;   // empty = builtin personas
  std::string template_path;  // empty = builtin template
  std::string backend = "mock";
  std::string endpoint;
  std::string model = "deepseek-r1";
  std::size_t n_problems = 10;
  std::uint64_t rng_seed = 0;
  std::string output_dir;
  std::string reasoning_mode = "step_by_step";
  std::string benchmark_path;
  std::string blocklist_path;
  std::string stop_after;  // "", "generate", "verify"

  inference::InferenceParams inference;
  verifier::Tolerances tolerances;
  promptgen::AlignmentConstraintSet constraints;
  taxonomy::SamplePolicy sample_policy;
  std::size_t min_question_chars = 40;
  CurationConfig curation;
  DifficultyConfig difficulty;
  EmbeddingConfig embeddings;

  std::string source_path;  // config file this was loaded from, if any

  static RunConfig load(const std::filesystem::path& path);  // throws ConfigError
  void validate() const;                                     // throws ConfigError
  /// Canonical content hash; drives run ids and checkpoint drift detection.
  std::string content_hash() const;
};

struct StageCounts {
  std::int64_t planned = 0;
  std::int64_t generated = 0;
  std::int64_t generation_failed = 0;  // timeouts / rejections / truncations
  std::int64_t parse_failed = 0;
  std::int64_t verify_failed = 0;
  std::map<std::string, std::int64_t> verify_failed_by_check;  // first failing check
  std::int64_t dedup_exact = 0;
  std::int64_t dedup_near = 0;
  std::int64_t detoxified = 0;
  std::int64_t decontaminated = 0;
  std::int64_t sampled_out = 0;
  std::int64_t band_filtered = 0;
  std::int64_t emit_rejected = 0;  // failed emission re-verification
  std::int64_t final_kept = 0;

  /// generated = final + every stage rejection, exactly.
  bool conservation_holds() const;
};

struct RunStats {
  StageCounts counts;
  std::map<std::string, std::int64_t> subjects;  // final records per tier-1 subject
  std::map<std::string, std::int64_t> stage_ms;  // wall clock; kept out of stats.json
  std::string run_id;
  std::string config_hash;
  bool completed = false;
  std::string stopped_after;
};

struct DatasetRecord {
  std::string problem;     // instruction + question + final-answer reminder
  std::string ref_answer;  // \boxed{...}
  std::string subject;
  std::vector<std::string> subdisciplines;
  std::vector<std::string> concepts;
  std::string persona;
  std::string prompt_id;
  std::string verification_digest;
  std::optional<double> pass_rate;
  std::optional<std::size_t> cluster;
};

struct RunResult {
  RunStats stats;
  std::vector<DatasetRecord> records;
  std::filesystem::path dataset_path;
  std::filesystem::path stats_path;
  std::filesystem::path report_path;
  std::filesystem::path checkpoint_path;
};

/// One unit of work flowing through the stages; also the line schema of the
/// generations/verified checkpoint files.
struct PipelineItem {
  std::string prompt_id;
  std::string subject;
  std::vector<std::string> subdisciplines;
  std::vector<std::string> concepts;
  std::string persona;
  std::string template_hash;
  inference::RawCompletion completion;
  inference::GenerationRecord record;
  verifier::VerificationReport report;
  std::string report_digest;  // survives checkpoint round-trips
  std::optional<difficulty::Rate> rate;
  std::optional<std::size_t> cluster;
};

/// Deterministic prompt plan: n seed selections, personas assigned
/// round-robin from an rng-shuffled order, all derived from config.rng_seed.
std::vector<promptgen::PromptInstance> plan_prompts(const RunConfig& config);

std::shared_ptr<inference::CompletionBackend> make_backend(const RunConfig& config);

/// Executes the full loop: plan, generate, parse, verify, curate, grade,
/// emit. Dataset and stats are written atomically; under the mock backend
/// and a fixed seed the bytes are identical across runs. `backend_override`
/// substitutes the configured backend (tests script failures through it).
/// Throws ConfigError and StageFailure.
RunResult run_pipeline(const RunConfig& config,
                       std::shared_ptr<inference::CompletionBackend> backend_override = nullptr);

/// Continues an interrupted run from its checkpoint; completed stages are
/// loaded from disk and skipped. Throws ConfigDrift when the config file
/// changed since the checkpoint was written, CorruptCheckpoint when the
/// checkpoint is unreadable.
RunResult resume_run(const std::filesystem::path& checkpoint_path,
                     std::shared_ptr<inference::CompletionBackend> backend_override = nullptr);

/// Human-readable funnel, per-check failures, subject distribution and
/// stage timings.
std::string emit_report(const RunStats& stats);

// ---- file schemas shared with the CLI subcommands ----------------------------

void write_generations_file(const std::filesystem::path& path,
                            const std::vector<PipelineItem>& items);
std::vector<PipelineItem> read_generations_file(const std::filesystem::path& path);
void write_verified_file(const std::filesystem::path& path,
                         const std::vector<PipelineItem>& items);
std::vector<PipelineItem> read_verified_file(const std::filesystem::path& path);
void write_reports_file(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, verifier::VerificationReport>>& reports);
void write_dataset_file(const std::filesystem::path& path,
                        const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_dataset_file(const std::filesystem::path& path);
void write_stats_file(const std::filesystem::path& path, const RunStats& stats);
RunStats read_stats_file(const std::filesystem::path& path);

/// Builds the emitted problem text (instruction + question + reminder).
std::string render_problem_text(const std::string& subject, const std::string& question,
                                const promptgen::AlignmentConstraintSet& constraints);

/// Atomic write: temp file in the same directory, then rename.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace sharp::pipeline
