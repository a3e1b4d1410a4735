#include "sharp/inference.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sharp/errors.hpp"
#include "sharp/hashing.hpp"
#include "sharp/rng.hpp"
#include "sharp/textutil.hpp"
#include "sharp/verifier.hpp"

namespace sharp::inference {

namespace {

using nlohmann::json;

std::int64_t count_tokens(std::string_view text) {
  std::int64_t count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

std::string completion_id(const std::string& prompt_id, const std::string& text,
                          const std::string& backend) {
  ContentHasher h;
  h.field(prompt_id);
  h.field(text);
  h.field(backend);
  return h.hex();
}

/// Swaps underscores and spaces inside a delimiter token, so both the
/// canonical `<question_start>` spelling and the `<question start>` variant
/// parse.
std::string spelling_variant(const std::string& marker) {
  std::string out = marker;
  for (char& c : out) {
    if (c == '_') {
      c = ' ';
    } else if (c == ' ') {
      c = '_';
    }
  }
  return out;
}

std::size_t find_marker(std::string_view text, const std::string& marker,
                        std::size_t from, std::size_t* length) {
  std::size_t pos = text.find(marker, from);
  if (pos != std::string_view::npos) {
    *length = marker.size();
    return pos;
  }
  const std::string variant = spelling_variant(marker);
  if (variant != marker) {
    pos = text.find(variant, from);
    if (pos != std::string_view::npos) {
      *length = variant.size();
      return pos;
    }
  }
  return std::string_view::npos;
}

}  // namespace

void InferenceParams::validate() const {
  if (temperature < 0) throw ConfigError("temperature must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) throw ConfigError("top_p must be in (0, 1]");
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (context_length < 1) throw ConfigError("context_length must be >= 1");
  if (repetition_penalty <= 0) throw ConfigError("repetition_penalty must be > 0");
}

// ---- mock backend -------------------------------------------------------------

std::string MockBackend::synthesize_completion(
    const std::string& prompt, const promptgen::AlignmentConstraintSet& constraints) {
  RandomEngine rng(fnv1a64(prompt));
  const std::uint64_t a = 2 + rng.bounded(48);
  const std::uint64_t b = 3 + rng.bounded(28);
  std::uint64_t c = 1 + rng.bounded(19);

  // echo the prompt's subject and first concept for thematic variety
  auto capture = [&prompt](std::string_view tag, std::string fallback) {
    const std::size_t at = prompt.find(tag);
    if (at == std::string::npos) return fallback;
    const std::size_t start = at + tag.size();
    const std::size_t end = prompt.find_first_of(",>\n", start);
    if (end == std::string::npos || end <= start) return fallback;
    const std::string value = trim(prompt.substr(start, end - start));
    return value.empty() ? fallback : value;
  };
  const std::string subject = capture("Subject_Name: ", "laboratory science");
  const std::string concept_name = capture("Basic Concepts: ", "reaction yield");

  const std::string sa = std::to_string(a);
  const std::string sb = std::to_string(b);
  std::string question;
  std::string reasoning;
  std::uint64_t total = 0;
  switch (rng.bounded(4)) {
    case 0:
      total = a * b + c;
      question = "In a " + subject + " study of " + concept_name + ", a sample is prepared in " +
                 sa + " batches, each containing " + sb + " identical units, and " +
                 std::to_string(c) +
                 " additional units are added during the final stage. Determine the "
                 "total number of units produced.";
      reasoning = "The batches give " + sa + " * " + sb + " = " + std::to_string(a * b) +
                  " units; adding " + std::to_string(c) + " yields " + std::to_string(total) + ".";
      break;
    case 1:
      total = a * (b + c);
      question = "A " + subject + " experiment probing " + concept_name + " runs " + sa +
                 " independent trials. Each trial consumes " + sb +
                 " grams of reagent and " + std::to_string(c) +
                 " grams of catalyst. Calculate the total mass in grams consumed across "
                 "all trials.";
      reasoning = "Each trial uses " + sb + " + " + std::to_string(c) + " = " +
                  std::to_string(b + c) + " grams, so " + sa + " trials consume " +
                  std::to_string(total) + " grams.";
      break;
    case 2:
      c = 1 + rng.bounded(std::min<std::uint64_t>(a * b - 1, 19));
      total = a * b - c;
      question = "During a " + subject + " assay centered on " + concept_name + ", " + sa +
                 " cultures each yield " + sb + " colonies, but " + std::to_string(c) +
                 " colonies fail quality control. Compute the net number of colonies "
                 "that remain.";
      reasoning = "The cultures yield " + sa + " * " + sb + " = " + std::to_string(a * b) +
                  " colonies; removing " + std::to_string(c) + " leaves " +
                  std::to_string(total) + ".";
      break;
    default:
      total = (a + b) * c;
      question = "A " + subject + " apparatus built to measure " + concept_name +
                 " combines two sources delivering " + sa + " and " + sb +
                 " units per cycle into " + std::to_string(c) +
                 " parallel channels. Determine how many units flow through the "
                 "apparatus in one cycle over all channels.";
      reasoning = "Each channel carries " + sa + " + " + sb + " = " + std::to_string(a + b) +
                  " units, so " + std::to_string(c) + " channels carry " +
                  std::to_string(total) + " units.";
      break;
  }

  return constraints.question_open + question + constraints.question_close + "\n" +
         reasoning + "\nThe final answer is " + constraints.answer_marker + "{" +
         std::to_string(total) + "}.";
}

void MockBackend::respond_when(std::string needle, CannedResponse response) {
  std::lock_guard<std::mutex> lock(mutex_);
  rules_.push_back(RuleEntry{std::move(needle), response, response.fail_times});
}

CompletionResult MockBackend::complete(const std::string& prompt,
                                       const InferenceParams& params) {
  (void)params;
  calls_.fetch_add(1);
  const int now = in_flight_.fetch_add(1) + 1;
  int peak = peak_.load();
  while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
  }
  if (hold_ms_ > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(hold_ms_));
  }
  struct Release {
    std::atomic<int>& counter;
    ~Release() { counter.fetch_sub(1); }
  } release{in_flight_};

  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& rule : rules_) {
      if (prompt.find(rule.needle) == std::string::npos) continue;
      if (rule.failures_left > 0) {
        --rule.failures_left;
        if (rule.response.fail_mode == "reject") {
          throw BackendRejected(500, "scripted failure");
        }
        throw BackendTimeout("scripted timeout");
      }
      return CompletionResult{rule.response.text, count_tokens(rule.response.text),
                              rule.response.finish_reason};
    }
  }
  if (!synthesize_) {
    throw BackendRejected(404, "no canned response for prompt");
  }
  const std::string text = synthesize_completion(prompt, promptgen::AlignmentConstraintSet{});
  return CompletionResult{text, count_tokens(text), "stop"};
}

// ---- http backend -------------------------------------------------------------

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig config;
  if (const char* endpoint = std::getenv("SHARP_ENDPOINT")) config.base_url = endpoint;
  if (const char* key = std::getenv("SHARP_API_KEY")) config.api_key = key;
  if (const char* model = std::getenv("SHARP_MODEL")) config.model = model;
  return config;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    throw ConfigError("http backend requires an endpoint URL (SHARP_ENDPOINT)");
  }
}

std::string HttpBackend::name() const { return "http:" + config_.model; }

CompletionResult HttpBackend::complete(const std::string& prompt,
                                       const InferenceParams& params) {
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.connect_timeout_s, 0);
  client.set_read_timeout(config_.read_timeout_s, 0);

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  json body = {
      {"model", config_.model},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
      {"temperature", params.temperature},
      {"top_p", params.top_p},
      {"max_tokens", params.max_tokens},
      {"repetition_penalty", params.repetition_penalty},
  };

  auto result = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!result) {
    throw BackendTimeout("no response from " + config_.base_url + ": " +
                         httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw BackendRejected(result->status, collapse_whitespace(result->body).substr(0, 200));
  }

  json response;
  try {
    response = json::parse(result->body);
  } catch (const json::parse_error& e) {
    throw BackendRejected(result->status, std::string("invalid JSON body: ") + e.what());
  }
  if (!response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty()) {
    throw BackendRejected(result->status, "response has no choices");
  }
  const json& choice = response["choices"][0];

  CompletionResult out;
  if (choice.contains("message") && choice["message"].contains("content")) {
    out.text = choice["message"]["content"].get<std::string>();
  } else if (choice.contains("text")) {
    out.text = choice["text"].get<std::string>();
  } else {
    throw BackendRejected(result->status, "choice carries no content");
  }
  out.finish_reason = choice.value("finish_reason", "stop");
  if (response.contains("usage") && response["usage"].contains("completion_tokens")) {
    out.token_count = response["usage"]["completion_tokens"].get<std::int64_t>();
  } else {
    out.token_count = count_tokens(out.text);
  }
  return out;
}

// ---- generate -------------------------------------------------------------------

RawCompletion generate(CompletionBackend& backend, const promptgen::PromptInstance& prompt,
                       const InferenceParams& params, const RetryPolicy& retry) {
  params.validate();
  auto sleep = retry.sleeper
                   ? retry.sleeper
                   : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  std::chrono::milliseconds backoff = retry.initial_backoff;
  const int attempts = std::max(retry.attempts, 1);
  for (int attempt = 1;; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    try {
      CompletionResult result = backend.complete(prompt.text, params);
      if (result.finish_reason == "length") {
        throw TruncatedOutput("completion hit the max_tokens cap (" +
                              std::to_string(params.max_tokens) + ")");
      }
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      RawCompletion completion;
      completion.prompt_id = prompt.id;
      completion.text = std::move(result.text);
      completion.token_count = result.token_count;
      completion.latency_ms = elapsed.count();
      completion.backend_name = backend.name();
      completion.id = completion_id(completion.prompt_id, completion.text,
                                    completion.backend_name);
      return completion;
    } catch (const BackendTimeout&) {
      if (attempt >= attempts) throw;
    } catch (const BackendRejected& e) {
      if (e.status() < 500 || attempt >= attempts) throw;
    }
    sleep(backoff);
    backoff *= 2;
  }
}

// ---- engine ----------------------------------------------------------------------

void GenerationEngine::Limiter::acquire() {
  std::unique_lock<std::mutex> lock(m_);
  cv_.wait(lock, [&] { return active_ < max_; });
  ++active_;
}

void GenerationEngine::Limiter::release() {
  {
    std::lock_guard<std::mutex> lock(m_);
    --active_;
  }
  cv_.notify_one();
}

GenerationEngine::GenerationEngine(std::shared_ptr<CompletionBackend> backend,
                                   InferenceParams params, RetryPolicy retry)
    : backend_(std::move(backend)),
      params_(params),
      retry_(std::move(retry)),
      limiter_(params.max_in_flight) {
  params_.validate();
}

RawCompletion GenerationEngine::generate(const promptgen::PromptInstance& prompt) {
  limiter_.acquire();
  struct Release {
    Limiter& limiter;
    ~Release() { limiter.release(); }
  } release{limiter_};
  return inference::generate(*backend_, prompt, params_, retry_);
}

std::vector<GenerationOutcome> GenerationEngine::generate_all(
    const std::vector<promptgen::PromptInstance>& prompts) {
  std::vector<GenerationOutcome> outcomes(prompts.size());
  if (prompts.empty()) return outcomes;

  std::atomic<std::size_t> next{0};
  const std::size_t worker_count =
      std::min<std::size_t>(prompts.size(), static_cast<std::size_t>(params_.max_in_flight));

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= prompts.size()) return;
      try {
        outcomes[i].completion = generate(prompts[i]);
      } catch (const BackendTimeout& e) {
        outcomes[i].error_kind = "timeout";
        outcomes[i].error = e.what();
      } catch (const BackendRejected& e) {
        outcomes[i].error_kind = "rejected";
        outcomes[i].error = e.what();
      } catch (const TruncatedOutput& e) {
        outcomes[i].error_kind = "truncated";
        outcomes[i].error = e.what();
      }
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(worker_count);
  for (std::size_t w = 0; w < worker_count; ++w) workers.emplace_back(worker);
  for (auto& t : workers) t.join();
  return outcomes;
}

// ---- parsing --------------------------------------------------------------------

GenerationRecord parse_generation(const RawCompletion& raw,
                                  const promptgen::AlignmentConstraintSet& constraints) {
  const std::string_view text = raw.text;

  std::size_t open_len = 0;
  const std::size_t open = find_marker(text, constraints.question_open, 0, &open_len);
  if (open == std::string_view::npos) {
    throw MissingDelimiter("open delimiter '" + constraints.question_open + "' not found");
  }
  std::size_t close_len = 0;
  const std::size_t close =
      find_marker(text, constraints.question_close, open + open_len, &close_len);
  if (close == std::string_view::npos) {
    throw MissingDelimiter("close delimiter '" + constraints.question_close + "' not found");
  }

  const std::string after_close(text.substr(close + close_len));
  std::string payload;
  try {
    payload = verifier::extract_boxed(after_close, constraints.answer_marker);
  } catch (const BoxedNotFound&) {
    throw MissingAnswer("no '" + constraints.answer_marker + "{...}' final answer found");
  }
  // reasoning ends where the chosen (last) wrapper begins
  const std::string opener = constraints.answer_marker + "{";
  const std::size_t wrapper = after_close.rfind(opener);

  GenerationRecord record;
  record.prompt_id = raw.prompt_id;
  record.question = trim(text.substr(open + open_len, close - open - open_len));
  record.reasoning = trim(after_close.substr(0, wrapper));
  record.raw_answer = std::move(payload);
  record.completion_ref = raw.id;
  return record;
}

}  // namespace sharp::inference
