#pragma once

// Embedders, cosine similarity and exact top-k search over in-memory vectors.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "codeguard/gateway.hpp"
#include "codeguard/model.hpp"

namespace codeguard {

// Dense vector with finite components. Construction rejects NaN/inf.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  // Recorded in index manifests; indexes from different embedders never mix.
  virtual std::string identifier() const = 0;
};

// Rejects blank text, then delegates.
EmbeddingVector embed(std::string_view text, const Embedder& embedder);

// Deterministic bag-of-words embedder: lowercase, split on non-alphanumeric
// ASCII, hash every token into one of `dimension` buckets, L2-normalize.
// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
class HashingEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDimension = 256;
  static constexpr std::uint64_t kDefenderSeed = 0x243f6a8885a308d3ULL;
  static constexpr std::uint64_t kAttackerSeed = 0x13198a2e03707344ULL;

  explicit HashingEmbedder(std::uint64_t seed = kDefenderSeed,
                           std::size_t dimension = kDimension);

  EmbeddingVector embed(std::string_view text) const override;
  std::string identifier() const override;

  std::size_t dimension() const noexcept { return dimension_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::size_t dimension_;
};

// Reads RACG_EMBED_URL / RACG_EMBED_KEY (and optional RACG_EMBED_MODEL).
HttpSettings embed_settings_from_env();

// Client for an OpenAI-style /embeddings endpoint.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpSettings settings);
  EmbeddingVector embed(std::string_view text) const override;
  std::string identifier() const override { return "http:" + settings_.model; }

 private:
  HttpSettings settings_;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws EmbeddingError on a
// dimension mismatch or a zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class VectorIndex {
 public:
  struct Item {
    std::string id;
    EmbeddingVector vector;

    bool operator==(const Item&) const = default;
  };

  VectorIndex() = default;
  VectorIndex(std::size_t dimension, std::string embedder_id);

  // Appends an item; the first item fixes the dimension when it is still 0.
  void add(std::string id, EmbeddingVector vector);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const std::vector<Item>& items() const noexcept { return items_; }
  const std::string& embedder_id() const noexcept { return embedder_id_; }

  bool operator==(const VectorIndex&) const = default;

 private:
  std::size_t dimension_ = 0;
  std::string embedder_id_;
  std::vector<Item> items_;
  std::unordered_set<std::string> ids_;
};

// Builds an index by embedding each text in order.
VectorIndex build_index(std::span<const std::string> ids, std::span<const std::string> texts,
                        const Embedder& embedder);

// Exact top-min(k, |index|) by cosine, best first; equal scores keep
// insertion order.
std::vector<ScoredId> top_k(const EmbeddingVector& query, const VectorIndex& index, int k);

// Sidecar persistence: `<stem>.vec` holds little-endian float64 components
// item after item; `<stem>.manifest.json` holds dimension, count, embedder and
// item ids in order.
void save_index(const VectorIndex& index, const std::filesystem::path& stem);
VectorIndex load_index(const std::filesystem::path& stem);

std::filesystem::path vectors_path(const std::filesystem::path& stem);
std::filesystem::path manifest_path(const std::filesystem::path& stem);

}  // namespace codeguard
