// Acceptance suite: one check per criterion, each printed as a single
// pass/fail line with its runtime. Oracle implementations live in
// tests/support and stay independent of the library paths they validate.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "sharp/curation.hpp"
#include "sharp/difficulty.hpp"
#include "sharp/inference.hpp"
#include "sharp/pipeline.hpp"
#include "sharp/records.hpp"
#include "sharp/rlcore.hpp"
#include "sharp/verifier.hpp"

namespace {

using namespace sharp;
namespace fs = std::filesystem;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& detail) {
  if (!condition) throw Failure(detail);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// ---- criterion 1: scale statement ---------------------------------------------------

void criterion_headline_substitution() {
  // The upstream benchmark gains (GPQA Diamond 54.7 vs 46.4 disttill; 37.0 vs
  // 35.5 RL zero) require multi-GPU training runs and a closed evaluation
  // loop; they are not reproducible at desk scale. Criteria 2-9 substitute
  // oracle- and property-based checks over every computational component.
}

// ---- criterion 2: verifier golden corpus + fuzz -------------------------------------

struct EqualCase {
  const char* candidate;
  const char* reference;
  bool expect;
};

void criterion_verifier_corpus() {
  const EqualCase cases[] = {
      // golden reference answers and direct variants
      {"2140", "2140", true},
      {"2140", "2140.0", true},
      {"2140", "2.14e3", true},
      {"2140", "2.140 \\times 10^{3}", true},
      {"2140.0001", "2140", true},
      {" 2140 ", "2140", true},
      {"$2140$", "2140", true},
      {"58.9%", "58.9\\%", true},
      {"58.9%", "0.589", true},
      {"0.589", "58.9%", true},
      {"58.90%", "58.9%", true},
      {"5.89 \\times 10^{-1}", "58.9%", true},
      {"3586", "3586", true},
      {"3586", "3.586e3", true},
      {"3586", "3.586\\times10^{3}", true},
      {"3586", "3,586", true},
      // ratios
      {"\\frac{1}{2}", "0.5", true},
      {"\\frac{2}{4}", "1/2", true},
      {"\\frac{1}{2}", "50%", true},
      {"1/3", "0.33333333", true},
      {"\\frac{-1}{2}", "-0.5", true},
      {"7/9", "0.77777778", true},
      {"2/6", "\\frac{1}{3}", true},
      {"\\dfrac{3}{4}", "75%", true},
      // zeros, signs, magnitudes
      {"0", "0.0", true},
      {"0", "1e-12", true},
      {"-0", "0", true},
      {"-273.15", "-273.15", true},
      {"100", "100.000001", true},
      {"1e6", "1000000", true},
      {"0.5", "5e-1", true},
      {"12.5%", "0.125", true},
      {"1,234,567", "1234567", true},
      {"10^{5}", "100000", true},
      // units
      {"5 kg", "5.0 kg", true},
      {"5 m/s", "5 m / s", true},
      {"1.05e2 m/s", "105 m/s", true},
      {"299792458 m", "2.99792458\\times10^{8} m", true},
      {"6.022 \\times 10^{23} mol^{-1}", "6.022e23 \\text{mol}^{-1}", true},
      // literals
      {"H2O", "H2O", true},
      {"the empty set", "the  empty   set", true},
      {"nan", "nan", true},
      // inequalities
      {"3585", "3586", false},
      {"2140", "2141", false},
      {"58.9%", "58.9", false},
      {"25%", "25", false},
      {"0.25", "25", false},
      {"\\frac{1}{3}", "0.3", false},
      {"5 kg", "5 g", false},
      {"5 kg", "5", false},
      {"5 m/s", "5 kg", false},
      {"abc", "42", false},
      {"alpha", "beta", false},
      {"1/2", "0.51", false},
      {"1e6", "1.001e6", false},
      {"0", "1e-6", false},
      {"59%", "58.9%", false},
      {"-0.5", "0.5", false},
      {"\\frac{2}{3}", "\\frac{3}{2}", false},
      {"1,23", "123", false},
      {"2140 J", "2140 K", false},
      {"10^{3}", "999", false},
      {"2139.5", "2140", false},
      {"x=y", "x = y", false},
  };
  const std::size_t case_count = sizeof(cases) / sizeof(cases[0]);
  require(case_count >= 60, "golden corpus must hold at least 60 cases, has " +
                                std::to_string(case_count));
  for (const auto& c : cases) {
    const bool got = verifier::answers_equal(verifier::parse_answer(c.candidate),
                                             verifier::parse_answer(c.reference));
    require(got == c.expect, std::string("answers_equal('") + c.candidate + "', '" +
                                 c.reference + "') = " + (got ? "true" : "false") +
                                 ", expected " + (c.expect ? "true" : "false"));
  }

  // fuzz: one million arbitrary byte strings must parse without faulting and
  // uphold the CanonicalAnswer invariants
  std::mt19937_64 rng(0x5eedf00d);
  const std::string structured = "0123456789.eE+-%\\{}()/ \tfractimes^_,$";
  for (int trial = 0; trial < 1000000; ++trial) {
    std::string bytes;
    const int length = static_cast<int>(rng() % 25);
    const bool plain = (rng() & 1) != 0;
    for (int i = 0; i < length; ++i) {
      bytes.push_back(plain ? static_cast<char>(rng() % 256)
                            : structured[rng() % structured.size()]);
    }
    verifier::CanonicalAnswer parsed;
    try {
      parsed = verifier::parse_answer(bytes);
    } catch (...) {
      throw Failure("parse_answer faulted on fuzz input (trial " +
                    std::to_string(trial) + ")");
    }
    if (parsed.kind == verifier::AnswerKind::number) {
      require(std::isfinite(parsed.value), "non-finite number from fuzz input");
    }
    if (parsed.kind == verifier::AnswerKind::ratio) {
      require(parsed.denominator > 0, "non-positive ratio denominator");
      require(std::gcd(std::llabs(parsed.numerator), parsed.denominator) == 1 ||
                  parsed.numerator == 0,
              "ratio not in lowest terms");
    }
  }
}

// ---- criterion 3: GRPO kernel ---------------------------------------------------------

void criterion_grpo_kernel() {
  // exact advantage fixture
  const auto fixture = rlcore::group_advantages({1, 0, 0, 1});
  const double expected[] = {1, -1, -1, 1};
  for (int i = 0; i < 4; ++i) {
    require(std::abs(fixture.advantages[i] - expected[i]) <= 1e-12,
            "group_advantages([1,0,0,1]) mismatch at index " + std::to_string(i));
  }

  // normalization invariants over random groups
  std::mt19937_64 rng(0xab57ac7);
  std::uniform_real_distribution<double> reward(-2.0, 2.0);
  int checked = 0;
  while (checked < 10000) {
    const std::size_t g = 2 + rng() % 63;
    std::vector<double> rewards(g);
    for (auto& r : rewards) r = reward(rng);
    const auto group = rlcore::group_advantages(rewards);
    if (group.degenerate) continue;
    ++checked;
    double mean = 0;
    for (double a : group.advantages) mean += a;
    mean /= static_cast<double>(g);
    double var = 0;
    for (double a : group.advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(g);
    require(std::abs(mean) <= 1e-9, "advantage mean exceeded 1e-9");
    require(std::abs(std::sqrt(var) - 1.0) <= 1e-9, "advantage std not 1 within 1e-9");
  }

  // KL estimator nonnegativity with equality only at zero log-ratio
  std::uniform_real_distribution<double> logp(-10.0, 0.0);
  for (int trial = 0; trial < 100000; ++trial) {
    const double lp_new = logp(rng);
    const double lp_ref = logp(rng);
    const auto kl = rlcore::kl_estimate(lp_new, lp_ref);
    require(kl.value >= 0.0, "kl_estimate went negative");
    if (std::abs(lp_new - lp_ref) > 1e-12) {
      require(kl.value > 0.0, "kl_estimate zero away from equality");
    } else {
      require(kl.value <= 1e-12, "kl_estimate not ~0 at equality");
    }
  }
  require(rlcore::kl_estimate(-3.0, -3.0).value <= 1e-12, "kl at equality not zero");

  // the three clip examples, exactly
  rlcore::GrpoParams params;
  params.clip_epsilon = 0.2;
  params.kl_coefficient = 0.0;
  auto one_token_group = [](double ratio) {
    rlcore::TrajectoryGroup group;
    const double logp_old = -1.0;
    group.outputs.push_back(
        {rlcore::TokenLogProbs{logp_old + std::log(ratio), logp_old,
                               logp_old + std::log(ratio)}});
    return group;
  };
  auto advantage_group = [](double advantage) {
    rlcore::RewardGroup group;
    group.rewards = {advantage};
    group.advantages = {advantage};
    return group;
  };
  const double identity =
      rlcore::grpo_objective({one_token_group(1.0)}, {advantage_group(1.0)}, params);
  require(std::abs(identity - 1.0) <= 1e-12, "identity-ratio objective != 1.0");
  const double clipped =
      rlcore::grpo_objective({one_token_group(2.0)}, {advantage_group(1.0)}, params);
  require(std::abs(clipped - 1.2) <= 1e-12, "clip-engaged objective != 1.2");
  const double pessimistic =
      rlcore::grpo_objective({one_token_group(2.0)}, {advantage_group(-1.0)}, params);
  require(std::abs(pessimistic - (-2.0)) <= 1e-12, "pessimistic objective != -2.0");
}

// ---- criterion 4: k-means oracle -------------------------------------------------------

void criterion_kmeans_oracle() {
  using curation::EmbeddingSet;
  auto embeddings_of = [](const std::vector<std::vector<double>>& points) {
    EmbeddingSet set;
    set.dim = points.empty() ? 0 : points[0].size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      set.vectors.emplace_back("p" + std::to_string(i), points[i]);
    }
    return set;
  };

  struct Fixture {
    std::vector<std::vector<double>> points;
    std::size_t k;
  };
  const std::vector<Fixture> fixtures = {
      {{{0, 0}, {0, 1}, {10, 0}, {10, 1}}, 2},
      {{{0, 0}, {0.5, 0}, {20, 0}, {20.5, 0}, {40, 0}, {40.5, 0}}, 3},
      {{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {50, 50, 50}, {51, 50, 50}, {50, 51, 50},
        {50, 50, 51}, {1, 1, 0}}, 2},
      {{{1, 2}, {3, 4}, {5, 6}}, 1},
      {{{-30}, {-29}, {0}, {1}, {30}, {31}}, 3},
      {{{0, 0}, {2, 2}}, 2},
      {{{5, 5}, {5, 5}, {80, 80}, {81, 81}}, 2},
  };
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    const auto& fixture = fixtures[f];
    require(fixture.points.size() <= 8 && fixture.k <= 3, "fixture out of oracle range");
    const auto result = curation::kmeans(embeddings_of(fixture.points), fixture.k, 7);
    const double optimal = testing::brute_force_inertia(fixture.points, fixture.k);
    require(std::abs(result.inertia - optimal) <= 1e-9,
            "fixture " + std::to_string(f) + ": Lloyd inertia " +
                std::to_string(result.inertia) + " != optimal " + std::to_string(optimal));
  }

  // inertia must never increase across iterations
  std::mt19937_64 rng(1904);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 36;
    const std::size_t dim = 1 + rng() % 4;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 6);
    std::vector<std::vector<double>> points(n, std::vector<double>(dim));
    for (auto& p : points) {
      for (auto& v : p) v = coord(rng);
    }
    const auto result = curation::kmeans(embeddings_of(points), k, rng());
    for (std::size_t i = 1; i < result.inertia_history.size(); ++i) {
      require(result.inertia_history[i] <= result.inertia_history[i - 1] + 1e-9,
              "inertia increased across a Lloyd iteration");
    }
  }
}

// ---- criterion 5: balanced sampling ----------------------------------------------------

void criterion_balanced_sampling() {
  auto assignment_of = [](const std::vector<std::size_t>& sizes) {
    curation::ClusterAssignment assignment;
    assignment.k = sizes.size();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      for (std::size_t i = 0; i < sizes[c]; ++i) {
        assignment.ids.push_back("c" + std::to_string(c) + "-" + std::to_string(i));
        assignment.labels.push_back(c);
      }
    }
    return assignment;
  };
  auto takes_of = [](const curation::ClusterAssignment& assignment,
                     const std::vector<std::string>& sampled) {
    std::vector<std::size_t> takes(assignment.k, 0);
    for (const auto& id : sampled) ++takes[assignment.label_of(id)];
    return takes;
  };

  // exact fixtures
  {
    const auto a = assignment_of({10, 3, 7});
    const auto takes = takes_of(a, curation::balanced_sample(a, 9, 3));
    require(takes == std::vector<std::size_t>({3, 3, 3}), "[10,3,7]/9 must take [3,3,3]");
    const auto b = assignment_of({5, 1});
    const auto takes_b = takes_of(b, curation::balanced_sample(b, 4, 3));
    require(takes_b == std::vector<std::size_t>({3, 1}), "[5,1]/4 must take [3,1]");
  }

  std::mt19937_64 rng(0xba1a9ced);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t clusters = 1 + rng() % 9;
    std::vector<std::size_t> sizes;
    std::size_t total = 0;
    for (std::size_t c = 0; c < clusters; ++c) {
      sizes.push_back(rng() % 14);
      total += sizes.back();
    }
    const std::size_t budget = rng() % (total + 4);
    const auto assignment = assignment_of(sizes);
    const auto sampled = curation::balanced_sample(assignment, budget, rng());
    require(sampled.size() == std::min(budget, total), "sample size != min(budget, total)");
    const auto takes = takes_of(assignment, sampled);
    require(takes == testing::water_fill_takes(sizes, budget),
            "takes diverge from the water-filling oracle");
    // when no cluster is supply-limited the takes stay within one unit
    std::size_t max_take = 0;
    std::size_t min_take = std::numeric_limits<std::size_t>::max();
    for (std::size_t t : takes) {
      max_take = std::max(max_take, t);
      min_take = std::min(min_take, t);
    }
    bool supply_permits = true;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (sizes[c] < max_take) supply_permits = false;
    }
    if (supply_permits && !takes.empty()) {
      require(max_take - min_take <= 1, "water level uneven despite ample supply");
    }
  }
}

// ---- criterion 6: decontamination -------------------------------------------------------

void criterion_decontamination() {
  const std::size_t n = 13;
  std::mt19937_64 rng(0xdec0ded);
  auto word = [&rng] {
    static const char* words[] = {"flux",    "entropy", "vector",  "orbital", "ligand",
                                  "isotope", "lattice", "plasma",  "quantum", "enzyme",
                                  "neuron",  "crystal", "torque",  "moment",  "charge"};
    return std::string(words[rng() % 15]) + std::to_string(rng() % 50);
  };
  // filler words are globally unique, so a planted 12-token span can never
  // accidentally grow into a shared 13-gram through its neighbors
  std::size_t filler_counter = 0;
  auto sentence = [&](std::size_t length) {
    std::string out;
    for (std::size_t i = 0; i < length; ++i) {
      if (i) out.push_back(' ');
      out += "filler" + std::to_string(filler_counter++);
    }
    return out;
  };

  std::string benchmark;
  for (int i = 0; i < 30; ++i) {
    if (i) benchmark.push_back(' ');
    benchmark += word();
  }
  // token windows of the benchmark for planting
  std::vector<std::string> bench_tokens;
  {
    std::istringstream in(benchmark);
    std::string token;
    while (in >> token) bench_tokens.push_back(token);
  }
  auto span_of = [&](std::size_t start, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
      if (i) out.push_back(' ');
      out += bench_tokens[start + i];
    }
    return out;
  };

  std::vector<curation::RecordView> records;
  std::vector<bool> planted13;
  for (int i = 0; i < 100; ++i) {
    const int bucket = i % 4;
    std::string question = sentence(6);
    bool contaminated = false;
    if (bucket == 0 || bucket == 1) {
      question += " " + span_of(rng() % (bench_tokens.size() - n), n) + " " + sentence(4);
      contaminated = true;
    } else if (bucket == 2) {
      question += " " + span_of(rng() % (bench_tokens.size() - (n - 1)), n - 1) + " " +
                  sentence(4);
    }  // bucket 3: clean
    records.push_back(curation::RecordView{"r" + std::to_string(i), question});
    planted13.push_back(contaminated);
  }

  const auto kept = curation::decontaminate(records, {benchmark}, n);
  std::set<std::string> kept_set(kept.begin(), kept.end());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool oracle_hit = testing::shares_ngram(records[i].question, benchmark, n);
    require(oracle_hit == planted13[i],
            "oracle disagrees with the planting at record " + std::to_string(i) +
                " (12-token spans must not collide)");
    const bool kept_it = kept_set.count(records[i].id) > 0;
    require(kept_it == !oracle_hit, "decontaminate diverges from the n-gram oracle at " +
                                        records[i].id);
  }
}

// ---- criterion 7: end-to-end determinism -------------------------------------------------

void criterion_end_to_end() {
  const fs::path root = fs::temp_directory_path() / "sharp_acceptance_e2e";
  fs::remove_all(root);
  fs::create_directories(root);

  // the seed topics fixture
  const fs::path taxonomy = root / "taxonomy.jsonl";
  {
    std::ofstream out(taxonomy);
    for (int i = 0; i < 10; ++i) {
      out << R"({"subject": "Field )" << i << R"(", "subdisciplines": ["Branch A)" << i
          << R"(", "Branch B)" << i << R"("], "concepts": ["Notion one )" << i
          << R"(", "Notion two )" << i << R"(", "Notion three )" << i << R"("]})" << "\n";
    }
  }

  const fs::path config_path = root / "config.json";
  {
    std::ofstream out(config_path);
    out << "{\n"
        << "  \"taxonomy_path\": \"" << taxonomy.string() << "\",\n"
        << "  \"n_problems\": 50,\n"
        << "  \"rng_seed\": 20250607,\n"
        << "  \"backend\": \"mock\",\n"
        << "  \"embedding_source\": \"hash\",\n"
        << "  \"embedding_dim\": 32,\n"
        << "  \"budget\": 32,\n"
        << "  \"output_dir\": \"" << (root / "out").string() << "\"\n"
        << "}\n";
  }

  std::string dataset_bytes;
  std::string stats_bytes;
  for (int run = 0; run < 3; ++run) {
    fs::remove_all(root / "out");
    const auto config = pipeline::RunConfig::load(config_path);
    const auto result = pipeline::run_pipeline(config);
    require(result.stats.completed, "run did not complete");
    const std::string dataset = read_file(result.dataset_path);
    const std::string stats = read_file(result.stats_path);
    if (run == 0) {
      dataset_bytes = dataset;
      stats_bytes = stats;
      require(!dataset.empty(), "dataset came out empty");
      // conservation identity, exactly
      const auto& c = result.stats.counts;
      require(c.conservation_holds(), "conservation identity violated");
      require(c.generated == 50, "expected 50 generated under the mock backend");
    } else {
      require(dataset == dataset_bytes, "dataset bytes differ across identical runs");
      require(stats == stats_bytes, "stats bytes differ across identical runs");
    }
  }

  // interrupt after generation, resume, and compare bytes again
  fs::remove_all(root / "out");
  auto stopped = pipeline::RunConfig::load(config_path);
  stopped.stop_after = "generate";
  const auto partial = pipeline::run_pipeline(stopped);
  require(partial.stats.stopped_after == "generate", "stop_after did not stop the run");
  const auto resumed = pipeline::resume_run(partial.checkpoint_path);
  require(read_file(resumed.dataset_path) == dataset_bytes,
          "resumed dataset differs from the uninterrupted run");
  require(read_file(resumed.stats_path) == stats_bytes,
          "resumed stats differ from the uninterrupted run");

  fs::remove_all(root);
}

// ---- criterion 8: golden alignment checks -------------------------------------------------

void criterion_alignment_checks() {
  promptgen::AlignmentConstraintSet constraints;

  inference::GenerationRecord supernova;
  supernova.prompt_id = "supernova";
  supernova.question = testing::kSupernovaQuestion;
  supernova.reasoning = "Compute the neutrino count, the flux at the detector, the "
                        "number of target nuclei, and multiply through.";
  supernova.raw_answer = testing::kSupernovaAnswer;
  const auto supernova_report = verifier::check_alignment(supernova, constraints);
  for (promptgen::Check c :
       {promptgen::Check::formatting, promptgen::Check::ground_truth,
        promptgen::Check::structure, promptgen::Check::modality, promptgen::Check::language,
        promptgen::Check::authenticity}) {
    const auto& result = supernova_report.checks.at(c);
    require(result.outcome == verifier::CheckOutcome::pass,
            std::string("supernova fails ") + std::string(promptgen::check_name(c)) + ": " +
                result.reason);
  }
  require(supernova_report.overall, "supernova problem must pass overall");

  inference::GenerationRecord zinc;
  zinc.prompt_id = "zinc";
  zinc.question = testing::kZincQuestion;
  zinc.reasoning = "Track the moles of carbon dioxide and zinc through both reactions.";
  zinc.raw_answer = testing::kZincAnswer;
  const auto zinc_report = verifier::check_alignment(zinc, constraints);
  require(zinc_report.checks.at(promptgen::Check::structure).outcome ==
              verifier::CheckOutcome::fail,
          "zinc multi-part problem must fail the structure check");
  require(!zinc_report.overall, "zinc problem must fail overall");
  // its answer itself is a legitimate percent value
  require(zinc_report.checks.at(promptgen::Check::ground_truth).outcome ==
              verifier::CheckOutcome::pass,
          "zinc reference answer must still parse as ground truth");
}

// ---- criterion 9: pass-rate statistics ------------------------------------------------------

void criterion_pass_rate_statistics() {
  std::mt19937_64 rng(0x9a55ae);
  const auto reference = verifier::parse_answer("42");
  for (double p : {0.2, 0.5, 0.9}) {
    double sum = 0.0;
    const int sets = 10000;
    const std::size_t k = 5;
    for (int s = 0; s < sets; ++s) {
      difficulty::AttemptSet attempts;
      attempts.record_id = "sim";
      for (std::size_t a = 0; a < k; ++a) {
        const bool correct = (static_cast<double>(rng() >> 11) * 0x1.0p-53) < p;
        attempts.attempts.push_back(correct ? "42" : "41");
      }
      sum += difficulty::compute_pass_rate(reference, attempts).value();
    }
    const double mean = sum / sets;
    require(std::abs(mean - p) <= 0.02,
            "empirical mean rate " + std::to_string(mean) + " misses p=" +
                std::to_string(p) + " by more than 0.02");
  }
}

// ---- runner ------------------------------------------------------------------------------

struct Criterion {
  int number;
  const char* title;
  double budget_seconds;  // 0 = untimed statement
  std::function<void()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "headline benchmark gains substituted by oracle/property checks", 0,
       criterion_headline_substitution},
      {2, "verifier golden corpus (>=60 cases) + 1e6-input fuzz", 10,
       criterion_verifier_corpus},
      {3, "GRPO kernel: exact fixtures, normalization, KL positivity, clip", 5,
       criterion_grpo_kernel},
      {4, "k-means matches brute-force optima; inertia non-increasing", 10,
       criterion_kmeans_oracle},
      {5, "balanced sampling water-filling property + fixtures", 2,
       criterion_balanced_sampling},
      {6, "decontamination: 13-token drops, 12-token keeps, oracle match", 2,
       criterion_decontamination},
      {7, "end-to-end determinism: 3 runs + interrupt/resume, conservation", 30,
       criterion_end_to_end},
      {8, "golden alignment checks: supernova passes, zinc fails structure", 10,
       criterion_alignment_checks},
      {9, "pass-rate statistics within 0.02 of p in {0.2, 0.5, 0.9}", 10,
       criterion_pass_rate_statistics},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && criterion.budget_seconds > 0 &&
        elapsed >= criterion.budget_seconds) {
      error = "runtime " + std::to_string(elapsed) + "s exceeded " +
              std::to_string(criterion.budget_seconds) + "s budget";
    }
    if (error.empty()) {
      std::printf("[PASS] criterion %d: %s (%.2fs)\n", criterion.number, criterion.title,
                  elapsed);
    } else {
      ++failures;
      std::printf("[FAIL] criterion %d: %s (%.2fs): %s\n", criterion.number,
                  criterion.title, elapsed, error.c_str());
    }
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
