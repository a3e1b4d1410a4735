#pragma once

#include <cstdint>
#include <string>

namespace sharp::inference {

/// Verbatim model output plus transport metadata. `text` is byte-exact.
struct RawCompletion {
  std::string prompt_id;
  std::string text;
  std::int64_t token_count = 0;
  std::int64_t latency_ms = 0;
  std::string backend_name;
  std::string id;  // content id; referenced by GenerationRecord

  bool operator==(const RawCompletion&) const = default;
};

/// Structured view of one completion: the question span between the
/// delimiters, the reasoning trace, and the final-answer payload.
struct GenerationRecord {
  std::string prompt_id;
  std::string question;
  std::string reasoning;
  std::string raw_answer;
  std::string completion_ref;

  bool operator==(const GenerationRecord&) const = default;
};

}  // namespace sharp::inference
