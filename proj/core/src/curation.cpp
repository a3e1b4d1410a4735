#include "sharp/curation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "sharp/errors.hpp"
#include "sharp/hashing.hpp"
#include "sharp/rng.hpp"
#include "sharp/textutil.hpp"

namespace sharp::curation {

namespace {

using nlohmann::json;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::size_t nearest_centroid(const std::vector<double>& point,
                             const std::vector<std::vector<double>>& centroids) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_dist) {  // strict: ties stay at the lowest index
      best_dist = d;
      best = c;
    }
  }
  return best;
}

/// k-means++ seeding: first centroid uniform, the rest sampled with
/// probability proportional to the squared distance to the nearest chosen
/// centroid. All draws come from the caller's engine, so the whole seeding
/// is a pure function of (embeddings order, k, rng_seed).
std::vector<std::vector<double>> seed_centroids(
    const std::vector<const std::vector<double>*>& points, std::size_t k,
    RandomEngine& rng, bool* degenerate) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  std::vector<bool> chosen(n, false);

  const std::size_t first = static_cast<std::size_t>(rng.bounded(n));
  centroids.push_back(*points[first]);
  chosen[first] = true;

  std::vector<double> min_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    min_dist[i] = squared_distance(*points[i], centroids.front());
  }

  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : min_dist) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.unit() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += min_dist[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = n - 1;  // numeric edge: target == total
    } else {
      // every point coincides with a chosen centroid, so any further
      // centroid duplicates one: flag and take the first unchosen point
      *degenerate = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = 0;
    }
    chosen[pick] = true;
    centroids.push_back(*points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], squared_distance(*points[i], centroids.back()));
    }
  }
  return centroids;
}

std::vector<std::string> tokens_of(std::string_view text) { return normalized_tokens(text); }

std::string join_ngram(const std::vector<std::string>& tokens, std::size_t start,
                       std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out.push_back('\x1f');
    out += tokens[start + i];
  }
  return out;
}

}  // namespace

// ---- embeddings -----------------------------------------------------------------

const std::vector<double>* EmbeddingSet::find(std::string_view id) const {
  for (const auto& [vid, vec] : vectors) {
    if (vid == id) return &vec;
  }
  return nullptr;
}

void EmbeddingSet::validate() const {
  std::unordered_set<std::string> ids;
  for (const auto& [id, vec] : vectors) {
    if (!ids.insert(id).second) throw SchemaError("duplicate embedding id: " + id);
    if (vec.size() != dim) {
      throw SchemaError("embedding '" + id + "' has dimension " +
                        std::to_string(vec.size()) + ", expected " + std::to_string(dim));
    }
    for (double v : vec) {
      if (!std::isfinite(v)) throw SchemaError("embedding '" + id + "' has a non-finite value");
    }
  }
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path.string());
  EmbeddingSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) +
                        ": invalid JSON: " + e.what());
    }
    if (!j.contains("id") || !j.contains("vector") || !j["vector"].is_array()) {
      throw SchemaError(path.string() + ":" + std::to_string(lineno) +
                        ": record needs 'id' and 'vector'");
    }
    std::vector<double> vec;
    vec.reserve(j["vector"].size());
    for (const auto& v : j["vector"]) vec.push_back(v.get<double>());
    if (set.vectors.empty()) set.dim = vec.size();
    set.vectors.emplace_back(j["id"].get<std::string>(), std::move(vec));
  }
  set.validate();
  return set;
}

void save_embeddings(const EmbeddingSet& embeddings, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write embedding file: " + path.string());
  for (const auto& [id, vec] : embeddings.vectors) {
    json j;
    j["id"] = id;
    j["vector"] = vec;
    out << j.dump() << '\n';
  }
}

std::vector<double> hash_embedding(std::string_view text, std::size_t dim) {
  std::vector<double> vec(dim, 0.0);
  if (dim == 0) return vec;
  const std::string normalized = to_lower(collapse_whitespace(text));
  if (normalized.size() >= 3) {
    for (std::size_t i = 0; i + 3 <= normalized.size(); ++i) {
      const std::uint64_t h = fnv1a64(std::string_view(normalized).substr(i, 3));
      const double sign = (h >> 63) ? 1.0 : -1.0;
      vec[h % dim] += sign;
    }
  } else if (!normalized.empty()) {
    const std::uint64_t h = fnv1a64(normalized);
    vec[h % dim] += 1.0;
  }
  double norm = 0.0;
  for (double v : vec) norm += v * v;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& v : vec) v /= norm;
  }
  return vec;
}

// ---- k-means --------------------------------------------------------------------

std::size_t ClusterAssignment::label_of(std::string_view id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return labels[i];
  }
  throw MissingEmbedding("no cluster label for record '" + std::string(id) + "'");
}

ClusterAssignment kmeans(const EmbeddingSet& embeddings, std::size_t k,
                         std::uint64_t rng_seed, std::size_t max_iter, double tol) {
  const std::size_t n = embeddings.vectors.size();
  if (k < 1 || k > n) {
    throw BadK("k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
  }
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (tol < 0) throw ConfigError("tol must be >= 0");

  std::vector<const std::vector<double>*> points;
  points.reserve(n);
  for (const auto& [id, vec] : embeddings.vectors) points.push_back(&vec);

  ClusterAssignment result;
  result.k = k;
  result.ids.reserve(n);
  for (const auto& [id, vec] : embeddings.vectors) result.ids.push_back(id);
  result.labels.assign(n, 0);

  RandomEngine rng(rng_seed);
  result.centroids = seed_centroids(points, k, rng, &result.degenerate);

  const std::size_t dim = embeddings.dim;
  std::vector<double> point_dist(n, 0.0);

  auto assign = [&]() {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t label = nearest_centroid(*points[i], result.centroids);
      result.labels[i] = label;
      point_dist[i] = squared_distance(*points[i], result.centroids[label]);
      inertia += point_dist[i];
    }
    return inertia;
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const double inertia = assign();
    result.inertia_history.push_back(inertia);
    result.iterations = iter + 1;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t label = result.labels[i];
      ++counts[label];
      for (std::size_t d = 0; d < dim; ++d) sums[label][d] += (*points[i])[d];
    }

    std::vector<std::vector<double>> next(k);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next[c] = sums[c];
        for (double& v : next[c]) v /= static_cast<double>(counts[c]);
      } else {
        next[c] = result.centroids[c];  // reseeded below
      }
    }

    // empty clusters steal the globally farthest point (from a cluster that
    // can spare one), lowest index on ties
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t farthest = n;
      double farthest_dist = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[result.labels[i]] <= 1) continue;
        if (point_dist[i] > farthest_dist) {
          farthest_dist = point_dist[i];
          farthest = i;
        }
      }
      if (farthest == n) {
        result.degenerate = true;
        continue;
      }
      --counts[result.labels[farthest]];
      next[c] = *points[farthest];
      result.labels[farthest] = c;
      counts[c] = 1;
      point_dist[farthest] = 0.0;
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(result.centroids[c], next[c])));
    }
    result.centroids = std::move(next);
    if (shift < tol) break;
  }

  result.inertia = assign();
  result.inertia_history.push_back(result.inertia);
  return result;
}

std::size_t choose_k_from_profile(const std::vector<std::size_t>& k_grid,
                                  const std::vector<double>& inertias) {
  if (k_grid.size() != inertias.size()) {
    throw ShapeMismatch("k grid and inertia profile sizes differ");
  }
  if (k_grid.size() < 3) {
    throw GridTooSmall("elbow selection needs at least 3 grid points, got " +
                       std::to_string(k_grid.size()));
  }
  for (std::size_t i = 1; i < k_grid.size(); ++i) {
    if (k_grid[i] <= k_grid[i - 1]) throw ConfigError("k grid must be strictly ascending");
  }
  std::size_t best_idx = 1;
  double best_curvature = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < k_grid.size(); ++i) {
    const double curvature = inertias[i - 1] - 2.0 * inertias[i] + inertias[i + 1];
    if (curvature > best_curvature) {  // strict: ties keep the smaller k
      best_curvature = curvature;
      best_idx = i;
    }
  }
  return k_grid[best_idx];
}

std::size_t choose_k_elbow(const EmbeddingSet& embeddings,
                           const std::vector<std::size_t>& k_grid,
                           std::uint64_t rng_seed) {
  if (k_grid.size() < 3) {
    throw GridTooSmall("elbow selection needs at least 3 grid points, got " +
                       std::to_string(k_grid.size()));
  }
  std::vector<double> inertias;
  inertias.reserve(k_grid.size());
  for (std::size_t k : k_grid) {
    inertias.push_back(kmeans(embeddings, k, rng_seed).inertia);
  }
  return choose_k_from_profile(k_grid, inertias);
}

// ---- balanced sampling ------------------------------------------------------------

std::vector<std::string> balanced_sample(const ClusterAssignment& assignment,
                                         std::size_t budget, std::uint64_t rng_seed) {
  const std::size_t n = assignment.ids.size();
  if (budget >= n) return assignment.ids;
  if (budget == 0) return {};

  std::vector<std::vector<std::size_t>> members(assignment.k);
  for (std::size_t i = 0; i < n; ++i) members[assignment.labels[i]].push_back(i);

  auto supply_at = [&](std::size_t cap) {
    std::size_t total = 0;
    for (const auto& m : members) total += std::min(m.size(), cap);
    return total;
  };

  // smallest cap whose supply covers the budget
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (const auto& m : members) hi = std::max(hi, m.size());
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (supply_at(mid) >= budget) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::size_t cap = lo;

  std::vector<std::size_t> takes(assignment.k, 0);
  std::size_t base_total = 0;
  for (std::size_t c = 0; c < assignment.k; ++c) {
    takes[c] = std::min(members[c].size(), cap > 0 ? cap - 1 : 0);
    base_total += takes[c];
  }
  std::size_t remainder = budget - base_total;
  for (std::size_t c = 0; c < assignment.k && remainder > 0; ++c) {
    if (members[c].size() >= cap && cap > 0) {
      ++takes[c];
      --remainder;
    }
  }

  RandomEngine rng(rng_seed);
  std::vector<bool> selected(n, false);
  for (std::size_t c = 0; c < assignment.k; ++c) {
    for (std::size_t idx : rng.sample_indices(members[c].size(), takes[c])) {
      selected[members[c][idx]] = true;
    }
  }

  std::vector<std::string> out;
  out.reserve(budget);
  for (std::size_t i = 0; i < n; ++i) {
    if (selected[i]) out.push_back(assignment.ids[i]);
  }
  return out;
}

// ---- text hygiene -------------------------------------------------------------------

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("cosine of vectors with different dims");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> dedup(const std::vector<RecordView>& records,
                               const EmbeddingSet& embeddings, double cosine_threshold) {
  if (!(cosine_threshold > 0.0 && cosine_threshold <= 1.0)) {
    throw ConfigError("cosine threshold must be in (0, 1]");
  }
  std::unordered_map<std::string_view, const std::vector<double>*> by_id;
  by_id.reserve(embeddings.vectors.size());
  for (const auto& [id, vec] : embeddings.vectors) by_id.emplace(id, &vec);
  for (const auto& record : records) {
    if (by_id.find(record.id) == by_id.end()) {
      throw MissingEmbedding("record '" + record.id + "' has no embedding vector");
    }
  }

  std::unordered_set<std::string> seen_text;
  std::vector<const std::vector<double>*> kept_vectors;
  std::vector<std::string> kept;
  for (const auto& record : records) {
    std::string normalized = collapse_whitespace(record.question);
    if (!seen_text.insert(std::move(normalized)).second) continue;
    const std::vector<double>* vec = by_id.at(record.id);
    bool near_dup = false;
    for (const auto* kept_vec : kept_vectors) {
      if (cosine_similarity(*vec, *kept_vec) >= cosine_threshold) {
        near_dup = true;
        break;
      }
    }
    if (near_dup) continue;
    kept.push_back(record.id);
    kept_vectors.push_back(vec);
  }
  return kept;
}

std::vector<std::string> decontaminate(const std::vector<RecordView>& records,
                                       const std::vector<std::string>& benchmark_texts,
                                       std::size_t ngram) {
  if (ngram < 1) throw ConfigError("n-gram window must be >= 1");
  std::unordered_set<std::string> contaminated;
  for (const auto& text : benchmark_texts) {
    const auto tokens = tokens_of(text);
    if (tokens.size() < ngram) continue;
    for (std::size_t i = 0; i + ngram <= tokens.size(); ++i) {
      contaminated.insert(join_ngram(tokens, i, ngram));
    }
  }
  std::vector<std::string> kept;
  kept.reserve(records.size());
  for (const auto& record : records) {
    bool hit = false;
    if (!contaminated.empty()) {
      const auto tokens = tokens_of(record.question);
      if (tokens.size() >= ngram) {
        for (std::size_t i = 0; i + ngram <= tokens.size(); ++i) {
          if (contaminated.count(join_ngram(tokens, i, ngram))) {
            hit = true;
            break;
          }
        }
      }
    }
    if (!hit) kept.push_back(record.id);
  }
  return kept;
}

std::vector<std::string> detoxify(const std::vector<RecordView>& records,
                                  const std::vector<std::string>& blocklist) {
  std::vector<std::string> terms;
  for (const auto& term : blocklist) {
    std::string t = trim(term);
    if (!t.empty()) terms.push_back(std::move(t));
  }
  std::vector<std::string> kept;
  kept.reserve(records.size());
  for (const auto& record : records) {
    bool blocked = false;
    for (const auto& term : terms) {
      if (contains_word(record.question, term)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) kept.push_back(record.id);
  }
  return kept;
}

}  // namespace sharp::curation
