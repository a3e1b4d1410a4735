#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sharp::curation {

/// Embedding vectors keyed by record id. External input: either a sidecar
/// file or any featurizer; clustering never depends on a specific model.
struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<double>>> vectors;

  const std::vector<double>* find(std::string_view id) const;
  /// Uniform finite dimensions and unique ids; throws SchemaError.
  void validate() const;
};

/// Sidecar format: one JSON record per line with keys `id` and `vector`.
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingSet& embeddings, const std::filesystem::path& path);

/// Deterministic character-trigram hashing featurizer (signed buckets,
/// L2-normalized). Endpoint-free embedding source for offline runs and tests.
std::vector<double> hash_embedding(std::string_view text, std::size_t dim);

struct ClusterAssignment {
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<std::string> ids;      // input order
  std::vector<std::size_t> labels;   // parallel to ids
  double inertia = 0.0;
  std::vector<double> inertia_history;  // one entry per assignment pass
  std::size_t iterations = 0;
  bool degenerate = false;  // duplicate centroids were unavoidable

  std::size_t label_of(std::string_view id) const;  // throws MissingEmbedding
};

/// Lloyd iteration with deterministic k-means++ style seeding from rng_seed.
/// Stops when the max centroid shift drops below tol or after max_iter
/// rounds; empty clusters are reseeded to the point farthest from its
/// centroid. Ties in assignment go to the lowest cluster index.
/// Throws BadK when k is out of range.
ClusterAssignment kmeans(const EmbeddingSet& embeddings, std::size_t k,
                         std::uint64_t rng_seed, std::size_t max_iter = 100,
                         double tol = 1e-7);

/// Elbow rule over an inertia profile: picks the grid k maximizing the
/// discrete second difference inertia(k-) - 2*inertia(k) + inertia(k+),
/// ties broken toward smaller k. Throws GridTooSmall below 3 grid points.
std::size_t choose_k_from_profile(const std::vector<std::size_t>& k_grid,
                                  const std::vector<double>& inertias);
std::size_t choose_k_elbow(const EmbeddingSet& embeddings,
                           const std::vector<std::size_t>& k_grid,
                           std::uint64_t rng_seed);

/// Water-filling quota: raises a per-cluster cap until supply under the cap
/// meets the budget, spreading the remainder one unit each to the
/// lowest-index clusters that can still take one. Members are sampled
/// uniformly without replacement inside each cluster; returned ids keep
/// input order.
std::vector<std::string> balanced_sample(const ClusterAssignment& assignment,
                                         std::size_t budget, std::uint64_t rng_seed);

struct RecordView {
  std::string id;
  std::string question;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Exact duplicates (whitespace-normalized question text) drop first; then a
/// greedy order-stable pass drops any record whose cosine similarity to an
/// already-kept record reaches the threshold.
/// Throws MissingEmbedding for a record without a vector.
std::vector<std::string> dedup(const std::vector<RecordView>& records,
                               const EmbeddingSet& embeddings, double cosine_threshold);

/// Drops records sharing at least one contiguous n-token sequence
/// (whitespace-tokenized, lowercased, punctuation-stripped) with any
/// benchmark text.
std::vector<std::string> decontaminate(const std::vector<RecordView>& records,
                                       const std::vector<std::string>& benchmark_texts,
                                       std::size_t ngram = 13);

/// Drops records whose question contains a blocklist term as a
/// case-insensitive whole-word (or whole-phrase) match.
std::vector<std::string> detoxify(const std::vector<RecordView>& records,
                                  const std::vector<std::string>& blocklist);

}  // namespace sharp::curation
