#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sharp/alignment.hpp"
#include "sharp/promptgen.hpp"
#include "sharp/records.hpp"

namespace sharp::inference {

struct InferenceParams {
  double temperature = 0.6;
  double top_p = 0.8;
  int max_tokens = 4192;
  double repetition_penalty = 1.05;
  int context_length = 16384;
  int max_in_flight = 48;

  void validate() const;  // throws ConfigError

  bool operator==(const InferenceParams&) const = default;
};

struct CompletionResult {
  std::string text;
  std::int64_t token_count = 0;
  std::string finish_reason = "stop";
};

/// A completion endpoint. Implementations must be safe for concurrent
/// complete() calls; the in-flight bound is enforced by the caller.
class CompletionBackend {
public:
  virtual ~CompletionBackend() = default;
  virtual std::string name() const = 0;
  virtual CompletionResult complete(const std::string& prompt,
                                    const InferenceParams& params) = 0;
};

struct CannedResponse {
  std::string text;
  std::string finish_reason = "stop";
  int fail_times = 0;          // fail this many calls before succeeding
  std::string fail_mode;       // "timeout" or "reject"
};

/// Deterministic table-driven backend. Rules are matched as substrings of
/// the incoming prompt in insertion order; without a match it synthesizes a
/// well-formed completion derived from the prompt content hash, so the same
/// prompt always yields the same text.
class MockBackend : public CompletionBackend {
public:
  std::string name() const override { return "mock"; }
  CompletionResult complete(const std::string& prompt,
                            const InferenceParams& params) override;

  void respond_when(std::string needle, CannedResponse response);
  void set_synthesize_by_default(bool enabled) { synthesize_ = enabled; }
  /// Widens the concurrency window so in-flight peaks are observable.
  void set_hold_ms(int ms) { hold_ms_ = ms; }

  int concurrent_peak() const { return peak_.load(); }
  int calls() const { return calls_.load(); }

  /// The default synthesized completion for a prompt (exposed for tests).
  static std::string synthesize_completion(const std::string& prompt,
                                           const promptgen::AlignmentConstraintSet& constraints);

private:
  struct RuleEntry {
    std::string needle;
    CannedResponse response;
    int failures_left = 0;  // guarded by mutex_
  };
  std::vector<RuleEntry> rules_;
  std::mutex mutex_;
  bool synthesize_ = true;
  int hold_ms_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  std::atomic<int> calls_{0};
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string path = "/v1/chat/completions";
  std::string model = "deepseek-r1";
  std::string api_key;
  int connect_timeout_s = 10;
  int read_timeout_s = 120;

  /// Reads SHARP_ENDPOINT, SHARP_API_KEY and SHARP_MODEL.
  static HttpBackendConfig from_env();
};

/// Chat-completions client: sends the rendered prompt as a single user
/// message and consumes the first choice of the response.
class HttpBackend : public CompletionBackend {
public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string name() const override;
  CompletionResult complete(const std::string& prompt,
                            const InferenceParams& params) override;

private:
  HttpBackendConfig config_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  // injectable for tests; defaults to std::this_thread::sleep_for
  std::function<void(std::chrono::milliseconds)> sleeper;
};

/// One completion with retries (timeouts and 5xx-class rejections only,
/// exponential backoff). Throws BackendTimeout, BackendRejected,
/// TruncatedOutput.
RawCompletion generate(CompletionBackend& backend,
                       const promptgen::PromptInstance& prompt,
                       const InferenceParams& params, const RetryPolicy& retry = {});

struct GenerationOutcome {
  std::optional<RawCompletion> completion;
  std::string error_kind;  // "", "timeout", "rejected", "truncated"
  std::string error;
};

/// Fans generate() out over worker threads while holding a global in-flight
/// bound of params.max_in_flight. Results are merged by prompt, never by
/// completion arrival order.
class GenerationEngine {
public:
  GenerationEngine(std::shared_ptr<CompletionBackend> backend, InferenceParams params,
                   RetryPolicy retry = {});

  RawCompletion generate(const promptgen::PromptInstance& prompt);
  std::vector<GenerationOutcome> generate_all(
      const std::vector<promptgen::PromptInstance>& prompts);

private:
  class Limiter {
  public:
    explicit Limiter(int max) : max_(max) {}
    void acquire();
    void release();

  private:
    std::mutex m_;
    std::condition_variable cv_;
    int max_;
    int active_ = 0;
  };

  std::shared_ptr<CompletionBackend> backend_;
  InferenceParams params_;
  RetryPolicy retry_;
  Limiter limiter_;
};

/// Splits a raw completion into question, reasoning and final answer.
/// The question is the span between the configured delimiters (the
/// space-spelled variant of each delimiter is accepted on parse); the answer
/// is the payload of the last wrapper; the reasoning is the text between the
/// close delimiter and that wrapper.
/// Throws MissingDelimiter, MissingAnswer, UnbalancedBraces.
GenerationRecord parse_generation(const RawCompletion& raw,
                                  const promptgen::AlignmentConstraintSet& constraints);

}  // namespace sharp::inference
