#include "codeguard/poison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "codeguard/errors.hpp"
#include "jsonl.hpp"

namespace codeguard {

using detail::json;

namespace {

std::vector<EmbeddingVector> embed_summaries(const std::vector<CodeExample>& corpus,
                                             const Embedder& embedder) {
  std::vector<EmbeddingVector> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) {
    try {
      out.push_back(embed(ex.summary, embedder));
    } catch (const EmbeddingError& e) {
      throw EmbeddingError("embedding " + ex.id + ": " + e.what());
    }
  }
  return out;
}

// Ranks vulnerable examples against one query vector; best first, ties by
// corpus position.
std::vector<std::size_t> rank_by_cosine(const EmbeddingVector& query,
                                        const std::vector<EmbeddingVector>& pool,
                                        std::size_t keep) {
  std::vector<double> scores(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) scores[i] = cosine(query, pool[i]);
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  keep = std::min(keep, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(keep);
  return order;
}

// Appends the selected vulnerable examples to K in plan order.
PoisonResult assemble(const std::vector<CodeExample>& functional,
                      const std::vector<CodeExample>& vulnerable,
                      const std::vector<std::size_t>& selected, PoisonPlan plan) {
  std::unordered_set<std::string> ids;
  for (const auto& ex : functional) ids.insert(ex.id);
  PoisonResult result;
  result.corpus = functional;
  for (std::size_t index : selected) {
    CodeExample injected = vulnerable[index];
    if (!ids.insert(injected.id).second) {
      throw ValidationError("vulnerable example id " + injected.id +
                            " collides with an existing corpus id");
    }
    injected.tainted = true;
    result.corpus.push_back(std::move(injected));
  }
  plan.resulting_corpus_size = result.corpus.size();
  result.plan = std::move(plan);
  return result;
}

double squared_distance(std::span<const double> a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// Uniform [0, 1) from the top 53 bits; identical on every standard library,
// unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

PoisonResult poison_scenario_1(const std::vector<AttackQuery>& queries,
                               const std::vector<CodeExample>& functional,
                               const std::vector<CodeExample>& vulnerable, int m,
                               const Embedder& attacker) {
  if (m < 1) throw ValidationError("m must be >= 1");
  if (vulnerable.empty()) throw ValidationError("vulnerable code base is empty");
  if (static_cast<std::size_t>(m) > vulnerable.size()) {
    spdlog::warn("m = {} exceeds the {} vulnerable examples; injecting all of them", m,
                 vulnerable.size());
  }
  const auto pool = embed_summaries(vulnerable, attacker);

  PoisonPlan plan;
  plan.mode = PoisonMode::ScenarioI;
  plan.m = m;
  std::vector<std::size_t> selected;
  std::map<std::size_t, std::size_t> slot;  // vulnerable index -> injection index
  for (const auto& query : queries) {
    const auto q = embed(query.text, attacker);
    for (std::size_t index : rank_by_cosine(q, pool, static_cast<std::size_t>(m))) {
      auto [it, fresh] = slot.emplace(index, plan.injections.size());
      if (fresh) {
        plan.injections.push_back(Injection{vulnerable[index].id, {}});
        selected.push_back(index);
      }
      plan.injections[it->second].triggers.push_back(query.id);
    }
  }
  return assemble(functional, vulnerable, selected, std::move(plan));
}

std::size_t representative_count(double p_percent, std::size_t corpus_size) {
  if (!(p_percent > 0.0 && p_percent <= 100.0)) {
    throw ValidationError("poisoning proportion must be in (0, 100]");
  }
  // p * n / 100 is exact for integral p; the epsilon absorbs representation
  // error of fractional p without rounding exact values up.
  const double raw = p_percent * static_cast<double>(corpus_size) / 100.0;
  const auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::size_t>(count, 1, std::max<std::size_t>(corpus_size, 1));
}

KMeansResult kmeans(const std::vector<EmbeddingVector>& points, std::size_t k,
                    std::uint64_t seed, int max_iterations) {
  if (points.empty()) throw ValidationError("k-means over no points");
  if (k == 0) throw ValidationError("k-means needs k >= 1");
  k = std::min(k, points.size());
  const std::size_t dim = points.front().dimension();
  for (const auto& p : points) {
    if (p.dimension() != dim) throw EmbeddingError("k-means points differ in dimension");
  }

  auto as_vector = [](const EmbeddingVector& v) {
    return std::vector<double>(v.values().begin(), v.values().end());
  };

  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids.push_back(as_vector(points[rng() % points.size()]));

  std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
  while (result.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i].values(), result.centroids.back()));
      total += nearest[i];
    }
    if (total == 0.0) break;
    const double target = unit_uniform(rng) * total;
    double running = 0.0;
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (nearest[i] == 0.0) continue;
      running += nearest[i];
      if (running > target) {
        pick = i;
        break;
      }
    }
    while (nearest[pick] == 0.0) --pick;  // guard against rounding at the tail
    result.centroids.push_back(as_vector(points[pick]));
  }

  const std::size_t clusters = result.centroids.size();
  result.assignment.assign(points.size(), 0);
  for (int iteration = 0; iteration < max_iterations; ++iteration) {
    bool changed = iteration == 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_distance = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < clusters; ++c) {
        const double d = squared_distance(points[i].values(), result.centroids[c]);
        if (d < best_distance) {
          best_distance = d;
          best = c;
        }
      }
      if (result.assignment[i] != best) {
        result.assignment[i] = best;
        changed = true;
      }
    }
    result.iterations = iteration + 1;
    if (!changed) break;

    std::vector<std::vector<double>> sums(clusters, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& sum = sums[result.assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sum[d] += points[i][d];
      ++counts[result.assignment[i]];
    }
    // An empty cluster takes over the point farthest from its own centroid
    // among clusters that can spare one.
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] != 0) continue;
      std::size_t donor = points.size();
      double farthest = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t home = result.assignment[i];
        if (counts[home] < 2) continue;
        const double d = squared_distance(points[i].values(), result.centroids[home]);
        if (d > farthest) {
          farthest = d;
          donor = i;
        }
      }
      if (donor == points.size() || farthest == 0.0) continue;
      const std::size_t home = result.assignment[donor];
      for (std::size_t d = 0; d < dim; ++d) sums[home][d] -= points[donor][d];
      --counts[home];
      result.assignment[donor] = c;
      sums[c] = as_vector(points[donor]);
      counts[c] = 1;
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        result.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
      }
    }
  }
  return result;
}

std::vector<std::size_t> select_representatives(const std::vector<EmbeddingVector>& points,
                                                std::size_t k, std::uint64_t seed) {
  const auto clustering = kmeans(points, k, seed);
  const std::size_t clusters = clustering.centroids.size();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(clusters, kNone);
  std::vector<double> best_distance(clusters, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = clustering.assignment[i];
    const double d = squared_distance(points[i].values(), clustering.centroids[c]);
    if (d < best_distance[c]) {
      best_distance[c] = d;
      best[c] = i;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < clusters; ++c) {
    if (best[c] != kNone) out.push_back(best[c]);
  }
  return out;
}

PoisonResult poison_scenario_2(const std::vector<CodeExample>& functional,
                               const std::vector<CodeExample>& vulnerable, double p_percent,
                               std::uint64_t seed, const Embedder& attacker) {
  if (functional.empty()) throw ValidationError("functional code base is empty");
  if (vulnerable.empty()) throw ValidationError("vulnerable code base is empty");
  const std::size_t wanted = representative_count(p_percent, functional.size());
  const auto points = embed_summaries(functional, attacker);
  const auto representatives = select_representatives(points, wanted, seed);
  if (representatives.size() < wanted) {
    spdlog::warn("clustering collapsed: {} representatives instead of {}", representatives.size(),
                 wanted);
  }
  const auto pool = embed_summaries(vulnerable, attacker);

  PoisonPlan plan;
  plan.mode = PoisonMode::ScenarioII;
  plan.p_percent = p_percent;
  plan.seed = seed;
  std::vector<std::size_t> selected;
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t ordinal = 0; ordinal < representatives.size(); ++ordinal) {
    const std::size_t index = rank_by_cosine(points[representatives[ordinal]], pool, 1).front();
    auto [it, fresh] = slot.emplace(index, plan.injections.size());
    if (fresh) {
      plan.injections.push_back(Injection{vulnerable[index].id, {}});
      selected.push_back(index);
    }
    plan.injections[it->second].triggers.push_back("cluster-" + std::to_string(ordinal));
  }
  return assemble(functional, vulnerable, selected, std::move(plan));
}

// ---------------------------------------------------------------------------

void save_plan(const PoisonPlan& plan, const std::filesystem::path& path) {
  json injections = json::array();
  for (const auto& inj : plan.injections) {
    injections.push_back({{"vuln_example_id", inj.vuln_example_id}, {"triggers", inj.triggers}});
  }
  const json doc{{"schema", "codeguard.poison-plan"},
                 {"version", 1},
                 {"mode", std::string(to_string(plan.mode))},
                 {"m", plan.m},
                 {"p_percent", plan.p_percent},
                 {"seed", plan.seed},
                 {"resulting_corpus_size", plan.resulting_corpus_size},
                 {"injections", std::move(injections)}};
  detail::write_file(path, doc.dump(1) + "\n");
}

PoisonPlan load_plan(const std::filesystem::path& path) {
  if (path.empty()) throw ParseError("empty plan path", 0);
  try {
    const json doc = json::parse(detail::read_file(path));
    if (doc.at("schema").get<std::string>() != "codeguard.poison-plan") {
      throw ParseError(path.string() + ": not a poison plan", 0);
    }
    PoisonPlan plan;
    plan.mode = poison_mode_from_string(doc.at("mode").get<std::string>());
    plan.m = doc.at("m").get<int>();
    plan.p_percent = doc.at("p_percent").get<double>();
    plan.seed = doc.at("seed").get<std::uint64_t>();
    plan.resulting_corpus_size = doc.at("resulting_corpus_size").get<std::size_t>();
    std::unordered_set<std::string> seen;
    for (const auto& inj : doc.at("injections")) {
      Injection i{inj.at("vuln_example_id").get<std::string>(),
                  inj.at("triggers").get<std::vector<std::string>>()};
      if (!seen.insert(i.vuln_example_id).second) {
        throw ParseError(path.string() + ": duplicate injection " + i.vuln_example_id, 0);
      }
      plan.injections.push_back(std::move(i));
    }
    return plan;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": malformed poison plan: " + e.what(), 0);
  } catch (const ValidationError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

}  // namespace codeguard
