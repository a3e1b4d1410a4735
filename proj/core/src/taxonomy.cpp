#include "sharp/taxonomy.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "sharp/errors.hpp"
#include "sharp/hashing.hpp"
#include "sharp/rng.hpp"
#include "sharp/textutil.hpp"

namespace sharp::taxonomy {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(std::string_view source, std::size_t lineno,
                               const std::string& detail) {
  std::ostringstream msg;
  msg << source << ":" << lineno << ": " << detail;
  throw SchemaError(msg.str());
}

std::vector<std::string> string_list(const json& j, const char* key,
                                     std::string_view source,
                                     std::size_t lineno) {
  if (!j.contains(key)) schema_error(source, lineno, std::string("missing field '") + key + "'");
  const json& field = j.at(key);
  if (!field.is_array()) schema_error(source, lineno, std::string("field '") + key + "' must be a list");
  std::vector<std::string> out;
  out.reserve(field.size());
  for (const auto& item : field) {
    if (!item.is_string()) schema_error(source, lineno, std::string("field '") + key + "' must contain strings");
    std::string value = trim(item.get<std::string>());
    if (value.empty()) schema_error(source, lineno, std::string("field '") + key + "' contains an empty entry");
    out.push_back(std::move(value));
  }
  if (out.empty()) schema_error(source, lineno, std::string("field '") + key + "' is empty");
  std::unordered_set<std::string> seen;
  for (const auto& value : out) {
    if (!seen.insert(value).second) {
      schema_error(source, lineno, std::string("duplicate entry '") + value + "' in '" + key + "'");
    }
  }
  return out;
}

}  // namespace

std::string compute_topic_id(const SeedTopic& topic) {
  ContentHasher h;
  h.field(trim(topic.subject));
  for (const auto& s : topic.subdisciplines) h.item(trim(s));
  h.field("concepts");
  for (const auto& c : topic.concepts) h.item(trim(c));
  return h.hex();
}

const SeedTopic* Taxonomy::find(std::string_view id) const {
  for (const auto& entry : entries) {
    if (entry.id == id) return &entry;
  }
  return nullptr;
}

Taxonomy parse_taxonomy(std::istream& in, std::string_view source_name) {
  Taxonomy taxonomy;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_error(source_name, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) schema_error(source_name, lineno, "record must be a JSON object");
    if (!j.contains("subject") || !j.at("subject").is_string()) {
      schema_error(source_name, lineno, "missing string field 'subject'");
    }
    SeedTopic topic;
    topic.subject = trim(j.at("subject").get<std::string>());
    if (topic.subject.empty()) schema_error(source_name, lineno, "field 'subject' is empty");
    topic.subdisciplines = string_list(j, "subdisciplines", source_name, lineno);
    topic.concepts = string_list(j, "concepts", source_name, lineno);
    topic.id = compute_topic_id(topic);
    if (!ids.insert(topic.id).second) {
      schema_error(source_name, lineno, "duplicate entry (id " + topic.id + ")");
    }
    taxonomy.entries.push_back(std::move(topic));
  }
  return taxonomy;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxonomy file: " + path.string());
  return parse_taxonomy(in, path.string());
}

std::string serialize_taxonomy(const Taxonomy& taxonomy) {
  std::string out;
  for (const auto& entry : taxonomy.entries) {
    json j;
    j["subject"] = entry.subject;
    j["subdisciplines"] = entry.subdisciplines;
    j["concepts"] = entry.concepts;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_taxonomy(const Taxonomy& taxonomy, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write taxonomy file: " + path.string());
  out << serialize_taxonomy(taxonomy);
  if (!out) throw IoError("failed writing taxonomy file: " + path.string());
}

SeedSelection sample_seed(const Taxonomy& taxonomy, std::uint64_t rng_seed,
                          const SamplePolicy& policy) {
  if (taxonomy.entries.empty()) throw EmptyTaxonomy("taxonomy has no entries");
  if (policy.min_subdisciplines < 1 || policy.min_concepts < 1 ||
      policy.max_subdisciplines < policy.min_subdisciplines ||
      policy.max_concepts < policy.min_concepts) {
    throw ConfigError("sample policy bounds must satisfy 1 <= min <= max");
  }

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < taxonomy.entries.size(); ++i) {
    const auto& e = taxonomy.entries[i];
    if (e.subdisciplines.size() >= policy.min_subdisciplines &&
        e.concepts.size() >= policy.min_concepts) {
      eligible.push_back(i);
    }
  }
  if (eligible.empty()) {
    throw PolicyUnsatisfiable("no taxonomy entry has at least " +
                              std::to_string(policy.min_subdisciplines) +
                              " subdisciplines and " +
                              std::to_string(policy.min_concepts) + " concepts");
  }

  RandomEngine rng(rng_seed);
  const auto& entry =
      taxonomy.entries[eligible[static_cast<std::size_t>(rng.bounded(eligible.size()))]];

  auto pick = [&](const std::vector<std::string>& items, std::size_t lo,
                  std::size_t hi) {
    hi = std::min(hi, items.size());
    const std::size_t count = lo + static_cast<std::size_t>(rng.bounded(hi - lo + 1));
    std::vector<std::string> chosen;
    chosen.reserve(count);
    for (std::size_t idx : rng.sample_indices(items.size(), count)) {
      chosen.push_back(items[idx]);
    }
    return chosen;
  };

  SeedSelection selection;
  selection.source_id = entry.id;
  selection.subject = entry.subject;
  selection.chosen_subdisciplines =
      pick(entry.subdisciplines, policy.min_subdisciplines, policy.max_subdisciplines);
  selection.chosen_concepts = pick(entry.concepts, policy.min_concepts, policy.max_concepts);
  selection.rng_seed = rng_seed;
  return selection;
}

}  // namespace sharp::taxonomy
