#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sharp/curation.hpp"
#include "sharp/difficulty.hpp"
#include "sharp/errors.hpp"
#include "sharp/inference.hpp"
#include "sharp/pipeline.hpp"
#include "sharp/promptgen.hpp"
#include "sharp/rlcore.hpp"
#include "sharp/taxonomy.hpp"
#include "sharp/textutil.hpp"
#include "sharp/verifier.hpp"

namespace {

using nlohmann::json;
using namespace sharp;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStage = 2;

std::vector<std::string> read_lines_or_die(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

json parse_json_line(const std::string& line, const std::string& path, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
  }
}

// ---- taxonomy validate ------------------------------------------------------------

int cmd_taxonomy_validate(const std::string& path) {
  const taxonomy::Taxonomy tax = taxonomy::load_taxonomy(path);
  std::size_t total_subs = 0;
  std::size_t total_concepts = 0;
  for (const auto& entry : tax.entries) {
    std::printf("%s  %s: %zu subdisciplines, %zu concepts\n", entry.id.c_str(),
                entry.subject.c_str(), entry.subdisciplines.size(),
                entry.concepts.size());
    total_subs += entry.subdisciplines.size();
    total_concepts += entry.concepts.size();
  }
  std::printf("total: %zu entries, %zu subdisciplines, %zu concepts\n",
              tax.entries.size(), total_subs, total_concepts);
  return kExitOk;
}

// ---- prompt render ----------------------------------------------------------------

int cmd_prompt_render(const std::string& taxonomy_path, const std::string& seed_id,
                      int index, std::size_t persona_index, std::uint64_t rng_seed,
                      const std::string& persona_path, const std::string& template_path) {
  const taxonomy::Taxonomy tax = taxonomy::load_taxonomy(taxonomy_path);
  taxonomy::Taxonomy scoped;
  if (!seed_id.empty()) {
    const taxonomy::SeedTopic* topic = tax.find(seed_id);
    if (topic == nullptr) throw ConfigError("no taxonomy entry with id " + seed_id);
    scoped.entries.push_back(*topic);
  } else if (index >= 0) {
    if (static_cast<std::size_t>(index) >= tax.entries.size()) {
      throw ConfigError("taxonomy index out of range");
    }
    scoped.entries.push_back(tax.entries[static_cast<std::size_t>(index)]);
  } else {
    scoped = tax;
  }
  const auto personas = persona_path.empty() ? promptgen::builtin_personas()
                                             : promptgen::load_personas(persona_path);
  if (persona_index >= personas.size()) {
    throw ConfigError("persona index out of range (have " +
                      std::to_string(personas.size()) + ")");
  }
  const auto tmpl = template_path.empty() ? promptgen::PromptTemplate::builtin()
                                          : promptgen::PromptTemplate::load(template_path);
  const auto selection = taxonomy::sample_seed(scoped, rng_seed);
  const auto prompt = promptgen::instantiate_prompt(
      selection, personas[persona_index], promptgen::AlignmentConstraintSet{},
      promptgen::ReasoningSpec{}, tmpl);
  std::printf("%s\n", prompt.text.c_str());
  std::fprintf(stderr, "prompt id: %s (template %s)\n", prompt.id.c_str(),
               prompt.template_hash.c_str());
  return kExitOk;
}

// ---- synth -------------------------------------------------------------------------

int cmd_synth(pipeline::RunConfig config) {
  config.stop_after = "generate";
  const auto result = pipeline::run_pipeline(config);
  std::printf("planned %lld prompts, captured %lld completions (%lld failed)\n",
              static_cast<long long>(result.stats.counts.planned),
              static_cast<long long>(result.stats.counts.generated),
              static_cast<long long>(result.stats.counts.generation_failed));
  std::printf("generations: %s\n",
              (std::filesystem::path(config.output_dir) / "generations.jsonl").c_str());
  std::printf("checkpoint:  %s\n", result.checkpoint_path.c_str());
  return kExitOk;
}

// ---- verify ------------------------------------------------------------------------

int cmd_verify(const std::string& in_path, const std::string& out_path,
               const std::string& report_path, verifier::Tolerances tolerances,
               std::size_t min_question_chars) {
  (void)tolerances;  // equality tolerances apply downstream; checks are structural
  auto items = pipeline::read_generations_file(in_path);
  promptgen::AlignmentConstraintSet constraints;
  verifier::AlignmentCheckOptions options;
  options.min_question_chars = min_question_chars;

  std::vector<pipeline::PipelineItem> verified;
  std::vector<std::pair<std::string, verifier::VerificationReport>> reports;
  std::size_t parse_failed = 0;
  for (auto& item : items) {
    inference::GenerationRecord record;
    try {
      record = inference::parse_generation(item.completion, constraints);
    } catch (const Error& e) {
      ++parse_failed;
      verifier::VerificationReport failed;
      for (promptgen::Check c : promptgen::kAllChecks) {
        failed.checks[c] = verifier::CheckResult{verifier::CheckOutcome::skipped,
                                                 std::string("parse failed: ") + e.what()};
      }
      failed.overall = false;
      reports.emplace_back(item.prompt_id, std::move(failed));
      continue;
    }
    auto report = verifier::check_alignment(record, constraints, options);
    reports.emplace_back(item.prompt_id, report);
    if (!report.overall) continue;
    item.record = std::move(record);
    item.report_digest = report.digest();
    item.report = std::move(report);
    verified.push_back(std::move(item));
  }
  pipeline::write_verified_file(out_path, verified);
  if (!report_path.empty()) pipeline::write_reports_file(report_path, reports);
  std::printf("%zu records in, %zu verified, %zu parse failures, %zu check failures\n",
              items.size(), verified.size(), parse_failed,
              items.size() - verified.size() - parse_failed);
  return kExitOk;
}

// ---- curate ------------------------------------------------------------------------

int cmd_curate(const std::string& in_path, const std::string& out_path,
               const std::string& embeddings_path, std::size_t hash_dim,
               double dedup_threshold, std::size_t ngram, const std::string& k_spec,
               std::size_t budget, const std::string& benchmark_path,
               const std::string& blocklist_path, std::uint64_t rng_seed) {
  auto items = pipeline::read_verified_file(in_path);
  const std::size_t input_count = items.size();

  curation::EmbeddingSet embeddings;
  if (!embeddings_path.empty()) {
    embeddings = curation::load_embeddings(embeddings_path);
  } else {
    embeddings.dim = hash_dim;
    for (const auto& item : items) {
      embeddings.vectors.emplace_back(item.prompt_id,
                                      curation::hash_embedding(item.record.question, hash_dim));
    }
  }

  auto views = [&items] {
    std::vector<curation::RecordView> v;
    v.reserve(items.size());
    for (const auto& item : items) {
      v.push_back(curation::RecordView{item.prompt_id, item.record.question});
    }
    return v;
  };
  auto keep = [&items](const std::vector<std::string>& kept_ids) {
    std::unordered_map<std::string, bool> kept;
    for (const auto& id : kept_ids) kept[id] = true;
    std::vector<pipeline::PipelineItem> next;
    next.reserve(kept_ids.size());
    for (auto& item : items) {
      if (kept.count(item.prompt_id)) next.push_back(std::move(item));
    }
    items = std::move(next);
  };

  keep(curation::dedup(views(), embeddings, dedup_threshold));
  const std::size_t after_dedup = items.size();
  if (!blocklist_path.empty()) {
    keep(curation::detoxify(views(), read_lines_or_die(blocklist_path)));
  }
  const std::size_t after_detox = items.size();
  if (!benchmark_path.empty()) {
    keep(curation::decontaminate(views(), read_lines_or_die(benchmark_path), ngram));
  }
  const std::size_t after_decontam = items.size();

  std::size_t sampled_out = 0;
  if (!items.empty() && budget > 0 && budget < items.size()) {
    curation::EmbeddingSet subset;
    subset.dim = embeddings.dim;
    for (const auto& item : items) {
      const auto* vec = embeddings.find(item.prompt_id);
      if (vec == nullptr) throw MissingEmbedding("record '" + item.prompt_id + "' has no vector");
      subset.vectors.emplace_back(item.prompt_id, *vec);
    }
    std::size_t k = 0;
    if (k_spec != "auto") {
      k = static_cast<std::size_t>(std::stoull(k_spec));
      if (k < 1 || k > items.size()) throw ConfigError("k out of range for " +
                                                       std::to_string(items.size()) + " records");
    } else {
      std::vector<std::size_t> grid;
      for (std::size_t g = 1; g <= std::max<std::size_t>(items.size() / 2, 1); g *= 2) {
        grid.push_back(g);
      }
      k = grid.size() >= 3 ? curation::choose_k_elbow(subset, grid, rng_seed)
                           : std::min<std::size_t>(items.size(), 2);
    }
    const auto assignment = curation::kmeans(subset, k, rng_seed);
    const std::size_t before = items.size();
    keep(curation::balanced_sample(assignment, budget, rng_seed));
    sampled_out = before - items.size();
    std::printf("clustered into k=%zu (inertia %.4f)\n", k, assignment.inertia);
  }

  pipeline::write_verified_file(out_path, items);
  std::printf("%zu in, %zu after dedup, %zu after detox, %zu after decontamination, "
              "%zu sampled out, %zu kept -> %s\n",
              input_count, after_dedup, after_detox, after_decontam, sampled_out,
              items.size(), out_path.c_str());
  return kExitOk;
}

// ---- passrate ----------------------------------------------------------------------

int cmd_passrate(const std::string& attempts_path, std::size_t k, std::size_t bins,
                 const std::string& band, verifier::Tolerances tolerances,
                 const std::string& out_path) {
  std::vector<std::pair<std::string, difficulty::Rate>> rates;
  std::size_t lineno = 0;
  for (const auto& line : read_lines_or_die(attempts_path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const json j = parse_json_line(line, attempts_path, lineno);
    difficulty::AttemptSet attempts;
    attempts.record_id = j.at("id").get<std::string>();
    attempts.attempts = j.at("attempts").get<std::vector<std::string>>();
    if (k > 0 && attempts.attempts.size() != k) {
      throw SchemaError(attempts_path + ":" + std::to_string(lineno) + ": record '" +
                        attempts.record_id + "' has " +
                        std::to_string(attempts.attempts.size()) + " attempts, expected " +
                        std::to_string(k));
    }
    std::string ref_text = j.at("ref_answer").get<std::string>();
    if (ref_text.find("\\boxed") != std::string::npos) {
      ref_text = verifier::extract_boxed(ref_text);
    }
    const auto reference = verifier::parse_answer(ref_text);
    rates.emplace_back(attempts.record_id,
                       difficulty::compute_pass_rate(reference, attempts, tolerances));
  }

  for (const auto& [id, rate] : rates) {
    json line;
    line["id"] = id;
    line["correct"] = rate.correct;
    line["total"] = rate.total;
    line["rate"] = rate.value();
    std::printf("%s\n", line.dump().c_str());
  }
  const auto report = difficulty::histogram(rates, bins);
  std::printf("%s", difficulty::render_text_histogram(report).c_str());

  if (!band.empty()) {
    const std::size_t colon = band.find(':');
    if (colon == std::string::npos) throw ConfigError("band must be lo:hi");
    const double lo = std::stod(band.substr(0, colon));
    const double hi = std::stod(band.substr(colon + 1));
    const auto kept = difficulty::filter_by_band(rates, lo, hi);
    std::printf("band [%g, %g]: %zu of %zu records kept\n", lo, hi, kept.size(),
                rates.size());
    if (!out_path.empty()) {
      std::string content;
      for (const auto& id : kept) {
        content += id;
        content += '\n';
      }
      pipeline::atomic_write_file(out_path, content);
    }
  }
  return kExitOk;
}

// ---- rl-check ----------------------------------------------------------------------

int cmd_rl_check(const std::string& trajectories_path, const std::string& rewards_path,
                 double epsilon, double beta) {
  std::vector<rlcore::TrajectoryGroup> trajectories;
  std::size_t lineno = 0;
  for (const auto& line : read_lines_or_die(trajectories_path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const json j = parse_json_line(line, trajectories_path, lineno);
    rlcore::TrajectoryGroup group;
    for (const auto& output : j.at("outputs")) {
      rlcore::OutputLogProbs tokens;
      for (const auto& token : output) {
        tokens.push_back(rlcore::TokenLogProbs{token.at("logp_new").get<double>(),
                                               token.at("logp_old").get<double>(),
                                               token.at("logp_ref").get<double>()});
      }
      group.outputs.push_back(std::move(tokens));
    }
    trajectories.push_back(std::move(group));
  }

  std::vector<rlcore::RewardGroup> groups;
  lineno = 0;
  for (const auto& line : read_lines_or_die(rewards_path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const json j = parse_json_line(line, rewards_path, lineno);
    groups.push_back(rlcore::group_advantages(j.at("rewards").get<std::vector<double>>()));
  }

  rlcore::GrpoParams params;
  params.clip_epsilon = epsilon;
  params.kl_coefficient = beta;
  const auto breakdown = rlcore::grpo_objective_detailed(trajectories, groups, params);

  std::printf("objective: %.9f over %zu groups (%zu tokens)\n", breakdown.objective,
              breakdown.per_group.size(), breakdown.token_count);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double mean_abs = 0.0;
    for (double a : groups[g].advantages) mean_abs += std::abs(a);
    mean_abs /= static_cast<double>(groups[g].advantages.size());
    std::printf("  group %zu: objective %.9f, G=%zu, mean|A|=%.6f%s\n", g,
                breakdown.per_group[g], groups[g].size(), mean_abs,
                groups[g].degenerate ? " (degenerate)" : "");
  }
  std::printf("kl: mean %.9f, max %.9f, capped tokens %zu\n", breakdown.kl_mean,
              breakdown.kl_max, breakdown.kl_capped_tokens);
  return kExitOk;
}

// ---- run / report -------------------------------------------------------------------

int cmd_run(const std::string& config_path, bool resume, const std::string& stop_after) {
  if (resume) {
    const auto config = pipeline::RunConfig::load(config_path);
    const auto checkpoint =
        std::filesystem::path(config.output_dir) / "checkpoint.json";
    const auto result = pipeline::resume_run(checkpoint);
    std::printf("%s", pipeline::emit_report(result.stats).c_str());
    std::printf("\ndataset: %s\n", result.dataset_path.c_str());
    return kExitOk;
  }
  auto config = pipeline::RunConfig::load(config_path);
  if (!stop_after.empty()) config.stop_after = stop_after;
  const auto result = pipeline::run_pipeline(config);
  std::printf("%s", pipeline::emit_report(result.stats).c_str());
  if (result.stats.completed) {
    std::printf("\ndataset: %s\nstats:   %s\n", result.dataset_path.c_str(),
                result.stats_path.c_str());
  } else {
    std::printf("\nstopped after '%s'; resume with --resume\ncheckpoint: %s\n",
                result.stats.stopped_after.c_str(), result.checkpoint_path.c_str());
  }
  return kExitOk;
}

int cmd_report(const std::string& stats_path) {
  const auto stats = pipeline::read_stats_file(stats_path);
  std::printf("%s", pipeline::emit_report(stats).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SHARP synthesis pipeline: taxonomy-driven STEM problem generation, "
               "verification, curation, difficulty grading, and the GRPO kernel"};
  app.require_subcommand(1);

  // taxonomy validate
  auto* taxonomy_cmd = app.add_subcommand("taxonomy", "Seed topics library tools");
  taxonomy_cmd->require_subcommand(1);
  auto* validate_cmd = taxonomy_cmd->add_subcommand("validate", "Validate a taxonomy file");
  std::string taxonomy_path;
  validate_cmd->add_option("path", taxonomy_path, "taxonomy JSONL file")->required();

  // prompt render
  auto* prompt_cmd = app.add_subcommand("prompt", "Prompt template tools");
  prompt_cmd->require_subcommand(1);
  auto* render_cmd = prompt_cmd->add_subcommand("render", "Render a synthesis prompt");
  std::string render_taxonomy, render_seed_id, render_personas, render_template;
  int render_index = -1;
  std::size_t render_persona_index = 0;
  std::uint64_t render_seed = 0;
  render_cmd->add_option("--taxonomy", render_taxonomy, "taxonomy file")->required();
  render_cmd->add_option("--seed-id", render_seed_id, "taxonomy entry id");
  render_cmd->add_option("--index", render_index, "taxonomy entry index");
  render_cmd->add_option("--persona-index", render_persona_index, "persona index");
  render_cmd->add_option("--seed", render_seed, "rng seed for the selection");
  render_cmd->add_option("--personas", render_personas, "persona file (builtin when absent)");
  render_cmd->add_option("--template", render_template, "template asset (builtin when absent)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Sample seeds, render prompts, query the backend");
  std::string synth_taxonomy, synth_personas, synth_template, synth_backend = "mock";
  std::string synth_outdir = "synth-out", synth_endpoint, synth_model = "deepseek-r1";
  std::size_t synth_n = 10;
  std::uint64_t synth_rng = 0;
  inference::InferenceParams synth_params;
  synth_cmd->add_option("--taxonomy", synth_taxonomy, "taxonomy file")->required();
  synth_cmd->add_option("--personas", synth_personas, "persona file");
  synth_cmd->add_option("--template", synth_template, "template asset");
  synth_cmd->add_option("--backend", synth_backend, "mock|http")->check(CLI::IsMember({"mock", "http"}));
  synth_cmd->add_option("--n", synth_n, "number of prompts");
  synth_cmd->add_option("--seed", synth_rng, "global rng seed");
  synth_cmd->add_option("--outdir", synth_outdir, "output directory");
  synth_cmd->add_option("--endpoint", synth_endpoint, "backend URL (or SHARP_ENDPOINT)");
  synth_cmd->add_option("--model", synth_model, "model name");
  synth_cmd->add_option("--temperature", synth_params.temperature, "sampling temperature");
  synth_cmd->add_option("--top-p", synth_params.top_p, "nucleus sampling mass");
  synth_cmd->add_option("--max-tokens", synth_params.max_tokens, "max output tokens");
  synth_cmd->add_option("--max-in-flight", synth_params.max_in_flight, "concurrent request bound");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Parse and check generations");
  std::string verify_in, verify_out = "verified.jsonl", verify_report = "report.jsonl";
  std::size_t verify_min_chars = 40;
  verifier::Tolerances verify_tol;
  verify_cmd->add_option("--in", verify_in, "generations JSONL")->required();
  verify_cmd->add_option("--out", verify_out, "verified output JSONL");
  verify_cmd->add_option("--report", verify_report, "per-record check report JSONL");
  verify_cmd->add_option("--rel-tol", verify_tol.rel, "relative tolerance");
  verify_cmd->add_option("--abs-tol", verify_tol.abs, "absolute tolerance");
  verify_cmd->add_option("--min-question-chars", verify_min_chars, "authenticity length floor");

  // curate
  auto* curate_cmd = app.add_subcommand("curate", "Dedup, detoxify, decontaminate, sample");
  std::string curate_in, curate_out = "curated.jsonl", curate_embeddings, curate_k = "auto";
  std::string curate_benchmark, curate_blocklist;
  double curate_threshold = 0.95;
  std::size_t curate_ngram = 13, curate_budget = 0, curate_hash_dim = 64;
  std::uint64_t curate_rng = 0;
  curate_cmd->add_option("--in", curate_in, "verified JSONL")->required();
  curate_cmd->add_option("--out", curate_out, "curated output JSONL");
  curate_cmd->add_option("--embeddings", curate_embeddings, "embedding sidecar JSONL");
  curate_cmd->add_option("--hash-dim", curate_hash_dim, "hash featurizer dim (no sidecar)");
  curate_cmd->add_option("--dedup-threshold", curate_threshold, "cosine near-dup threshold");
  curate_cmd->add_option("--ngram", curate_ngram, "decontamination n-gram window");
  curate_cmd->add_option("--k", curate_k, "cluster count or 'auto'");
  curate_cmd->add_option("--budget", curate_budget, "balanced sampling budget (0 = keep all)");
  curate_cmd->add_option("--benchmark", curate_benchmark, "benchmark texts, one per line");
  curate_cmd->add_option("--blocklist", curate_blocklist, "blocked terms, one per line");
  curate_cmd->add_option("--seed", curate_rng, "rng seed");

  // passrate
  auto* passrate_cmd = app.add_subcommand("passrate", "Pass-rate stats over attempt sets");
  std::string passrate_attempts, passrate_band, passrate_out;
  std::size_t passrate_k = 5, passrate_bins = 10;
  verifier::Tolerances passrate_tol;
  passrate_cmd->add_option("--attempts", passrate_attempts, "attempts JSONL")->required();
  passrate_cmd->add_option("--k", passrate_k, "expected attempts per record (0 = any)");
  passrate_cmd->add_option("--bins", passrate_bins, "histogram bins");
  passrate_cmd->add_option("--band", passrate_band, "keep band lo:hi");
  passrate_cmd->add_option("--out", passrate_out, "write kept ids here");
  passrate_cmd->add_option("--rel-tol", passrate_tol.rel, "relative tolerance");
  passrate_cmd->add_option("--abs-tol", passrate_tol.abs, "absolute tolerance");

  // rl-check
  auto* rl_cmd = app.add_subcommand("rl-check", "Evaluate the GRPO objective on logged data");
  std::string rl_traj, rl_rewards;
  double rl_epsilon = 0.2, rl_beta = 0.001;
  rl_cmd->add_option("--trajectories", rl_traj, "trajectory groups JSONL")->required();
  rl_cmd->add_option("--rewards", rl_rewards, "reward groups JSONL")->required();
  rl_cmd->add_option("--epsilon", rl_epsilon, "clip epsilon");
  rl_cmd->add_option("--beta", rl_beta, "KL coefficient");

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute the full pipeline from a config file");
  std::string run_config, run_stop_after;
  bool run_resume = false;
  run_cmd->add_option("--config", run_config, "run config JSON")->required();
  run_cmd->add_flag("--resume", run_resume, "continue from the config's checkpoint");
  run_cmd->add_option("--stop-after", run_stop_after, "stop after 'generate' or 'verify'")
      ->check(CLI::IsMember({"generate", "verify"}));

  // report
  auto* report_cmd = app.add_subcommand("report", "Render a stats file as a report");
  std::string report_stats;
  report_cmd->add_option("--stats", report_stats, "stats JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (validate_cmd->parsed()) return cmd_taxonomy_validate(taxonomy_path);
    if (render_cmd->parsed()) {
      return cmd_prompt_render(render_taxonomy, render_seed_id, render_index,
                               render_persona_index, render_seed, render_personas,
                               render_template);
    }
    if (synth_cmd->parsed()) {
      pipeline::RunConfig config;
      config.taxonomy_path = synth_taxonomy;
      config.persona_path = synth_personas;
      config.template_path = synth_template;
      config.backend = synth_backend;
      config.endpoint = synth_endpoint;
      config.model = synth_model;
      config.n_problems = synth_n;
      config.rng_seed = synth_rng;
      config.output_dir = synth_outdir;
      config.inference = synth_params;
      return cmd_synth(std::move(config));
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(verify_in, verify_out, verify_report, verify_tol, verify_min_chars);
    }
    if (curate_cmd->parsed()) {
      return cmd_curate(curate_in, curate_out, curate_embeddings, curate_hash_dim,
                        curate_threshold, curate_ngram, curate_k, curate_budget,
                        curate_benchmark, curate_blocklist, curate_rng);
    }
    if (passrate_cmd->parsed()) {
      return cmd_passrate(passrate_attempts, passrate_k, passrate_bins, passrate_band,
                          passrate_tol, passrate_out);
    }
    if (rl_cmd->parsed()) return cmd_rl_check(rl_traj, rl_rewards, rl_epsilon, rl_beta);
    if (run_cmd->parsed()) return cmd_run(run_config, run_resume, run_stop_after);
    if (report_cmd->parsed()) return cmd_report(report_stats);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ConfigDrift& e) {
    std::fprintf(stderr, "config drift: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitConfig;
  } catch (const StageFailure& e) {
    std::fprintf(stderr, "stage failure: %s\n", e.what());
    return kExitStage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitStage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitStage;
  }
  return kExitOk;
}
