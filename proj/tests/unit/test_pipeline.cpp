#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sharp/errors.hpp"
#include "sharp/inference.hpp"
#include "sharp/pipeline.hpp"
#include "sharp/taxonomy.hpp"
#include "sharp/verifier.hpp"

using namespace sharp;
using namespace sharp::pipeline;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("sharp_test_" + tag + "_" +
                                        std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path write_taxonomy(const fs::path& dir) {
  const fs::path path = dir / "taxonomy.jsonl";
  std::string content;
  for (int i = 0; i < 6; ++i) {
    content += R"({"subject": "Subject )" + std::to_string(i) +
               R"(", "subdisciplines": ["SubA)" + std::to_string(i) + R"(", "SubB)" +
               std::to_string(i) + R"("], "concepts": ["Concept one )" + std::to_string(i) +
               R"(", "Concept two )" + std::to_string(i) + R"(", "Concept three )" +
               std::to_string(i) + R"("]})" + "\n";
  }
  write_file(path, content);
  return path;
}

RunConfig base_config(const TempDir& dir, std::size_t n = 12) {
  RunConfig config;
  config.taxonomy_path = write_taxonomy(dir.path).string();
  config.n_problems = n;
  config.rng_seed = 4242;
  config.backend = "mock";
  config.output_dir = (dir.path / "out").string();
  config.embeddings.source = "hash";
  config.embeddings.hash_dim = 24;
  config.curation.budget = 0;
  return config;
}

RunConfig config_from_file(const TempDir& dir, const std::string& extra = "") {
  const RunConfig base = base_config(dir);
  std::string body = "{\n"
                     "  \"taxonomy_path\": \"" + base.taxonomy_path + "\",\n"
                     "  \"n_problems\": 10,\n"
                     "  \"rng_seed\": 7,\n"
                     "  \"backend\": \"mock\",\n"
                     "  \"embedding_source\": \"hash\",\n"
                     "  \"embedding_dim\": 24,\n"
                     "  \"output_dir\": \"" + (dir.path / "out").string() + "\"" +
                     (extra.empty() ? "" : ",\n" + extra) + "\n}\n";
  const fs::path path = dir.path / "config.json";
  write_file(path, body);
  return RunConfig::load(path);
}

}  // namespace

TEST_CASE("zero seed topics produce an empty dataset and zeroed stats") {
  TempDir dir("zero");
  RunConfig config = base_config(dir, 0);
  const auto result = run_pipeline(config);
  CHECK(result.stats.counts.generated == 0);
  CHECK(result.stats.counts.final_kept == 0);
  CHECK(result.stats.counts.conservation_holds());
  CHECK(result.stats.completed);
  CHECK(fs::exists(result.dataset_path));
  CHECK(read_file(result.dataset_path).empty());
}

TEST_CASE("a malformed completion becomes a parse failure, not a fault") {
  TempDir dir("malformed");
  RunConfig config = base_config(dir, 5);
  // sabotage every prompt drawn from the first prompt's subject; the prompt
  // text embeds the subject, so a substring rule can target those
  const auto prompts = plan_prompts(config);
  REQUIRE(prompts.size() == 5);
  const std::string needle = prompts[0].seed.subject;
  std::int64_t expected = 0;
  for (const auto& prompt : prompts) {
    if (prompt.text.find(needle) != std::string::npos) ++expected;
  }
  REQUIRE(expected >= 1);

  auto backend = std::make_shared<inference::MockBackend>();
  inference::CannedResponse garbled;
  garbled.text = "garbled output, no markers";
  backend->respond_when(needle, garbled);
  const auto result = run_pipeline(config, backend);
  const auto& counts = result.stats.counts;
  CHECK(counts.generated == 5);
  CHECK(counts.parse_failed == expected);
  CHECK(counts.final_kept <= 5 - expected);
  CHECK(counts.conservation_holds());
}

TEST_CASE("full run is deterministic and the emitted records re-verify") {
  TempDir dir("determinism");
  RunConfig config = base_config(dir, 16);
  config.curation.budget = 10;
  const auto first = run_pipeline(config);
  const std::string dataset_bytes = read_file(first.dataset_path);
  const std::string stats_bytes = read_file(first.stats_path);

  fs::remove_all(config.output_dir);
  const auto second = run_pipeline(config);
  CHECK(read_file(second.dataset_path) == dataset_bytes);
  CHECK(read_file(second.stats_path) == stats_bytes);

  for (const auto& record : second.records) {
    const std::string payload = verifier::extract_boxed(record.ref_answer);
    CHECK(verifier::parse_answer(payload).kind != verifier::AnswerKind::literal);
    CHECK(record.problem.find("Solve the following") == 0);
  }
  CHECK(second.stats.counts.conservation_holds());
}

TEST_CASE("interrupt after generation resumes to a byte-identical dataset") {
  TempDir dir("resume");

  // uninterrupted reference run
  RunConfig config = config_from_file(dir);
  fs::remove_all(config.output_dir);
  const auto reference = run_pipeline(config);
  const std::string reference_bytes = read_file(reference.dataset_path);
  const std::string reference_stats = read_file(reference.stats_path);
  fs::remove_all(config.output_dir);

  // interrupted run: stop after generation, then resume from the checkpoint
  RunConfig stopped = config;
  stopped.stop_after = "generate";
  const auto partial = run_pipeline(stopped);
  CHECK(partial.stats.stopped_after == "generate");
  CHECK(!fs::exists(partial.dataset_path));
  const auto resumed = resume_run(partial.checkpoint_path);
  CHECK(read_file(resumed.dataset_path) == reference_bytes);
  CHECK(read_file(resumed.stats_path) == reference_stats);
}

TEST_CASE("resume with an edited config is ConfigDrift") {
  TempDir dir("drift");
  RunConfig config = config_from_file(dir);
  config.stop_after = "generate";
  const auto partial = run_pipeline(config);
  // edit the config file after the checkpoint was written
  std::string body = read_file(dir.path / "config.json");
  const auto at = body.find("\"rng_seed\": 7");
  REQUIRE(at != std::string::npos);
  body.replace(at, 13, "\"rng_seed\": 8");
  write_file(dir.path / "config.json", body);
  CHECK_THROWS_AS(resume_run(partial.checkpoint_path), ConfigDrift);
}

TEST_CASE("resume from a truncated checkpoint is CorruptCheckpoint") {
  TempDir dir("corrupt");
  RunConfig config = config_from_file(dir);
  config.stop_after = "generate";
  const auto partial = run_pipeline(config);
  const std::string checkpoint = read_file(partial.checkpoint_path);
  write_file(partial.checkpoint_path, checkpoint.substr(0, checkpoint.size() / 2));
  CHECK_THROWS_AS(resume_run(partial.checkpoint_path), CorruptCheckpoint);
  CHECK_THROWS_AS(resume_run(dir.path / "never_written.json"), CorruptCheckpoint);
}

TEST_CASE("config validation catches missing paths and bad values") {
  TempDir dir("badconfig");
  RunConfig config = base_config(dir);
  config.taxonomy_path = (dir.path / "missing.jsonl").string();
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = base_config(dir);
  config.backend = "carrier-pigeon";
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = base_config(dir);
  config.curation.dedup_threshold = 1.5;
  CHECK_THROWS_AS(config.validate(), ConfigError);

  config = base_config(dir);
  config.difficulty.band_lo = 0.9;
  config.difficulty.band_hi = 0.1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("unknown config keys are rejected") {
  TempDir dir("unknownkey");
  write_taxonomy(dir.path);
  const fs::path path = dir.path / "config.json";
  write_file(path, R"({"taxonomy_path": "x", "output_dir": "y", "n_problmes": 3})");
  CHECK_THROWS_AS(RunConfig::load(path), ConfigError);
  write_file(path, "{broken json");
  CHECK_THROWS_AS(RunConfig::load(path), ConfigError);
}

TEST_CASE("difficulty grading from an attempts file annotates pass rates and bands filter") {
  TempDir dir("grading");
  RunConfig config = base_config(dir, 8);

  // first run: discover the surviving prompt ids and their answers
  const auto probe = run_pipeline(config);
  REQUIRE(probe.records.size() >= 2);

  // attempts: first record always wrong (rate 0), the rest always right
  std::string attempts;
  for (std::size_t i = 0; i < probe.records.size(); ++i) {
    const std::string answer =
        i == 0 ? "999999999"
               : verifier::extract_boxed(probe.records[i].ref_answer);
    attempts += R"({"id": ")" + probe.records[i].prompt_id + R"(", "attempts": [")" +
                answer + R"(", ")" + answer + R"("]})" + "\n";
  }
  const fs::path attempts_path = dir.path / "attempts.jsonl";
  write_file(attempts_path, attempts);

  fs::remove_all(config.output_dir);
  config.difficulty.enabled = true;
  config.difficulty.attempts_path = attempts_path.string();
  config.difficulty.band_lo = 0.5;  // drop the rate-0 record
  const auto graded = run_pipeline(config);
  CHECK(graded.stats.counts.band_filtered == 1);
  CHECK(graded.records.size() == probe.records.size() - 1);
  for (const auto& record : graded.records) {
    REQUIRE(record.pass_rate.has_value());
    CHECK(*record.pass_rate == doctest::Approx(1.0));
  }
  CHECK(graded.stats.counts.conservation_holds());
}

TEST_CASE("emit_report renders the funnel, subjects, and percentages") {
  RunStats stats;
  stats.run_id = "testrun";
  stats.config_hash = "cafebabe";
  stats.completed = true;
  stats.counts.planned = 3;
  stats.counts.generated = 3;
  stats.counts.final_kept = 3;
  stats.subjects = {{"physics", 2}, {"biology", 1}};
  stats.counts.verify_failed_by_check = {{"structure", 3}, {"modality", 1}};
  const std::string report = emit_report(stats);
  CHECK(report.find("physics: 2 (66.7%)") != std::string::npos);
  CHECK(report.find("biology: 1 (33.3%)") != std::string::npos);
  CHECK(report.find("structure: 3") != std::string::npos);
  CHECK(report.find("modality: 1") != std::string::npos);
  CHECK(report.find("conservation identity: holds") != std::string::npos);
}

TEST_CASE("emit_report handles empty stats without dividing by zero") {
  RunStats stats;
  const std::string report = emit_report(stats);
  CHECK(report.find("(none)") != std::string::npos);
}

TEST_CASE("atomic writes leave no partial files behind") {
  TempDir dir("atomic");
  const fs::path target = dir.path / "data.jsonl";
  atomic_write_file(target, "line one\n");
  CHECK(read_file(target) == "line one\n");
  atomic_write_file(target, "replaced\n");
  CHECK(read_file(target) == "replaced\n");
  CHECK(!fs::exists(target.string() + ".tmp"));
}

TEST_CASE("generation and verified files round-trip") {
  TempDir dir("files");
  PipelineItem item;
  item.prompt_id = "p1";
  item.subject = "Physics";
  item.subdisciplines = {"Mechanics"};
  item.concepts = {"Momentum", "Impulse"};
  item.persona = "physicist";
  item.template_hash = "deadbeef";
  item.completion.prompt_id = "p1";
  item.completion.id = "c1";
  item.completion.text = "<question_start>Q<question_end> R \\boxed{4}";
  item.completion.token_count = 5;
  item.completion.latency_ms = 0;
  item.completion.backend_name = "mock";

  const fs::path generations = dir.path / "generations.jsonl";
  write_generations_file(generations, {item});
  const auto loaded = read_generations_file(generations);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].prompt_id == "p1");
  CHECK(loaded[0].completion.text == item.completion.text);
  CHECK(loaded[0].concepts == item.concepts);

  item.record.prompt_id = "p1";
  item.record.question = "Q";
  item.record.reasoning = "R";
  item.record.raw_answer = "4";
  item.record.completion_ref = "c1";
  item.report_digest = "1234";
  const fs::path verified = dir.path / "verified.jsonl";
  write_verified_file(verified, {item});
  const auto reloaded = read_verified_file(verified);
  REQUIRE(reloaded.size() == 1);
  CHECK(reloaded[0].record.question == "Q");
  CHECK(reloaded[0].record.raw_answer == "4");
  CHECK(reloaded[0].report_digest == "1234");
}

TEST_CASE("the problem text carries exactly one final-answer instruction") {
  promptgen::AlignmentConstraintSet constraints;
  const std::string problem = render_problem_text(
      "Organic Chemistry, Synthesis", "Compute the yield in grams.", constraints);
  CHECK(problem.find("Solve the following organic chemistry problem step by step.") == 0);
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = problem.find("put your final answer within", pos)) != std::string::npos) {
    ++count;
    pos += 10;
  }
  CHECK(count == 1);
}

TEST_CASE("blocklist and benchmark files filter records through the run") {
  TempDir dir("filters");
  RunConfig config = base_config(dir, 12);

  // probe run to learn the surviving questions
  const auto probe = run_pipeline(config);
  REQUIRE(probe.records.size() >= 3);

  // blocklist: a word from the first record's question ("batches", "trials",
  // "cultures" or "channels" depending on the synthesized variant)
  std::string blocked_word;
  for (const std::string candidate : {"batches", "trials", "cultures", "channels"}) {
    if (probe.records[0].problem.find(candidate) != std::string::npos) {
      blocked_word = candidate;
      break;
    }
  }
  REQUIRE(!blocked_word.empty());
  write_file(dir.path / "blocklist.txt", blocked_word + "\n");

  // benchmark: the verbatim question of the second record contaminates it
  const std::string contaminated_question = probe.records[1].problem;
  write_file(dir.path / "benchmark.txt", contaminated_question + "\n");

  fs::remove_all(config.output_dir);
  config.blocklist_path = (dir.path / "blocklist.txt").string();
  config.benchmark_path = (dir.path / "benchmark.txt").string();
  const auto filtered = run_pipeline(config);
  CHECK(filtered.stats.counts.detoxified >= 1);
  CHECK(filtered.stats.counts.decontaminated >= 1);
  CHECK(filtered.stats.counts.conservation_holds());
  for (const auto& record : filtered.records) {
    CHECK(record.problem.find(" " + blocked_word + " ") == std::string::npos);
  }
}

TEST_CASE("curation stage toggles disable their filters") {
  TempDir dir("toggles");
  RunConfig config = base_config(dir, 10);
  config.curation.enable_near_dedup = false;
  config.curation.enable_cluster_sample = false;
  config.curation.budget = 4;  // ignored without cluster sampling
  const auto result = run_pipeline(config);
  CHECK(result.stats.counts.dedup_near == 0);
  CHECK(result.stats.counts.sampled_out == 0);
  for (const auto& record : result.records) CHECK(!record.cluster.has_value());
  CHECK(result.stats.counts.conservation_holds());
}

TEST_CASE("resume from the verify checkpoint matches the uninterrupted run") {
  TempDir dir("resume2");
  RunConfig config = config_from_file(dir);
  fs::remove_all(config.output_dir);
  const auto reference = run_pipeline(config);
  const std::string reference_bytes = read_file(reference.dataset_path);
  fs::remove_all(config.output_dir);

  RunConfig stopped = config;
  stopped.stop_after = "verify";
  const auto partial = run_pipeline(stopped);
  CHECK(partial.stats.stopped_after == "verify");
  const auto resumed = resume_run(partial.checkpoint_path);
  CHECK(read_file(resumed.dataset_path) == reference_bytes);
}

TEST_CASE("resuming a completed run returns its artifacts unchanged") {
  TempDir dir("resume3");
  RunConfig config = config_from_file(dir);
  const auto done = run_pipeline(config);
  const auto again = resume_run(done.checkpoint_path);
  CHECK(again.records.size() == done.records.size());
  CHECK(again.stats.counts.final_kept == done.stats.counts.final_kept);
  CHECK(read_file(again.dataset_path) == read_file(done.dataset_path));
}

TEST_CASE("backend-mode grading queries the run backend k times per record") {
  TempDir dir("backendgrade");
  RunConfig config = base_config(dir, 6);
  config.curation.enable_near_dedup = false;
  config.difficulty.enabled = true;
  config.difficulty.attempts_k = 3;
  const auto result = run_pipeline(config);
  // the mock backend re-answers its own problems deterministically, but the
  // attempt prompt is the rendered problem text, not the original synthesis
  // prompt, so rates land at exactly 0 or 1 per record
  for (const auto& record : result.records) {
    REQUIRE(record.pass_rate.has_value());
    CHECK((*record.pass_rate == 0.0 || *record.pass_rate == 1.0));
  }
  CHECK(result.stats.counts.conservation_holds());
}

TEST_CASE("resume after the config file disappears is ConfigDrift") {
  TempDir dir("gonecfg");
  RunConfig config = config_from_file(dir);
  config.stop_after = "generate";
  const auto partial = run_pipeline(config);
  fs::remove(dir.path / "config.json");
  CHECK_THROWS_AS(resume_run(partial.checkpoint_path), ConfigDrift);
}
