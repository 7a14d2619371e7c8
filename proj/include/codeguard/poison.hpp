#pragma once

// Knowledge-base poisoning attacks against the functional code base, driven
// by an attacker-side embedder that never sees the defender's index.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "codeguard/embedding.hpp"
#include "codeguard/model.hpp"

namespace codeguard {

struct Injection {
  std::string vuln_example_id;
  // Scenario I: ids of the queries that selected the example.
  // Scenario II: "cluster-<ordinal>" of the representative(s) it answers.
  std::vector<std::string> triggers;

  bool operator==(const Injection&) const = default;
};

struct PoisonPlan {
  PoisonMode mode = PoisonMode::ScenarioI;
  int m = 0;                 // Scenario I only
  double p_percent = 0.0;    // Scenario II only
  std::uint64_t seed = 0;    // Scenario II only
  std::vector<Injection> injections;  // no duplicate vuln_example_id
  std::size_t resulting_corpus_size = 0;

  bool operator==(const PoisonPlan&) const = default;
};

struct PoisonResult {
  std::vector<CodeExample> corpus;  // functional examples, then injections
  PoisonPlan plan;
};

struct AttackQuery {
  std::string id;
  std::string text;
};

// Scenario I (query intent exposed): for every query, the m vulnerable
// examples whose summaries are most similar to it. m larger than the
// vulnerable pool takes the whole pool.
PoisonResult poison_scenario_1(const std::vector<AttackQuery>& queries,
                               const std::vector<CodeExample>& functional,
                               const std::vector<CodeExample>& vulnerable, int m,
                               const Embedder& attacker);

// Scenario II (intent agnostic): cluster the functional summaries into
// ceil(p% * |K|) groups, take the member closest to each centroid and inject
// the vulnerable example most similar to each of those representatives.
PoisonResult poison_scenario_2(const std::vector<CodeExample>& functional,
                               const std::vector<CodeExample>& vulnerable, double p_percent,
                               std::uint64_t seed, const Embedder& attacker);

// ceil(p_percent / 100 * corpus_size), at least 1.
std::size_t representative_count(double p_percent, std::size_t corpus_size);

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;  // point -> centroid
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding from a mt19937_64 stream. Ties in
// assignment go to the lowest centroid index. An empty cluster is moved to
// the point farthest from its centroid (taken from a cluster with at least
// two members); it keeps its centroid when no such point exists. When every remaining point coincides with a chosen centroid,
// seeding stops early and fewer than k centroids are returned.
KMeansResult kmeans(const std::vector<EmbeddingVector>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations = 100);

// Index of the member closest to each non-empty cluster's centroid (ties:
// lowest point index), in centroid order.
std::vector<std::size_t> select_representatives(const std::vector<EmbeddingVector>& points,
                                                std::size_t k, std::uint64_t seed);

void save_plan(const PoisonPlan& plan, const std::filesystem::path& path);
PoisonPlan load_plan(const std::filesystem::path& path);

}  // namespace codeguard
