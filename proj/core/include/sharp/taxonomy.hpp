#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sharp::taxonomy {

/// One three-tier entry of the seed topics library:
/// subject -> subdisciplines -> concepts.
struct SeedTopic {
  std::string subject;
  std::vector<std::string> subdisciplines;
  std::vector<std::string> concepts;
  std::string id;  // content hash; identical content yields identical id

  bool operator==(const SeedTopic&) const = default;
};

/// Deterministic content id over the trimmed fields.
std::string compute_topic_id(const SeedTopic& topic);

struct Taxonomy {
  std::vector<SeedTopic> entries;

  const SeedTopic* find(std::string_view id) const;
  bool operator==(const Taxonomy&) const = default;
};

/// Subset-size bounds used when instantiating a prompt from an entry.
struct SamplePolicy {
  std::size_t min_subdisciplines = 1;
  std::size_t max_subdisciplines = 2;
  std::size_t min_concepts = 2;
  std::size_t max_concepts = 5;

  bool operator==(const SamplePolicy&) const = default;
};

/// The chosen slice of one entry that a prompt is rendered from. Replaying
/// with the same rng_seed reproduces the same selection.
struct SeedSelection {
  std::string source_id;
  std::string subject;  // resolved from the source entry
  std::vector<std::string> chosen_subdisciplines;
  std::vector<std::string> chosen_concepts;
  std::uint64_t rng_seed = 0;

  bool operator==(const SeedSelection&) const = default;
};

/// Loads a taxonomy file: one JSON record per line with keys `subject`,
/// `subdisciplines`, `concepts`. Order is preserved.
/// Throws IoError when unreadable and SchemaError (naming the line number)
/// on missing fields, empty lists, in-list duplicates, or duplicate entries.
Taxonomy load_taxonomy(const std::filesystem::path& path);

/// Stream variant of load_taxonomy; `source_name` appears in error messages.
Taxonomy parse_taxonomy(std::istream& in, std::string_view source_name);

/// Serializes in the same one-record-per-line format load_taxonomy reads.
void save_taxonomy(const Taxonomy& taxonomy, const std::filesystem::path& path);
std::string serialize_taxonomy(const Taxonomy& taxonomy);

/// Picks one entry uniformly among entries satisfying the policy minima,
/// then uniform subset sizes and members within the policy bounds.
/// Deterministic under a fixed rng_seed.
/// Throws EmptyTaxonomy and PolicyUnsatisfiable.
SeedSelection sample_seed(const Taxonomy& taxonomy, std::uint64_t rng_seed,
                          const SamplePolicy& policy = {});

}  // namespace sharp::taxonomy
