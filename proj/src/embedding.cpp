#include "codeguard/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "codeguard/errors.hpp"
#include "codeguard/hash.hpp"
#include "http_client.hpp"
#include "jsonl.hpp"

namespace codeguard {

using detail::json;

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw EmbeddingError("embedding has a non-finite component");
  }
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingVector embed(std::string_view text, const Embedder& embedder) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw EmbeddingError("cannot embed empty text");
  }
  return embedder.embed(text);
}

// ---------------------------------------------------------------------------

HashingEmbedder::HashingEmbedder(std::uint64_t seed, std::size_t dimension)
    : seed_(seed), dimension_(dimension) {
  if (dimension_ == 0) throw EmbeddingError("embedding dimension must be positive");
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
  std::vector<double> counts(dimension_, 0.0);
  std::string token;
  std::size_t tokens = 0;
  auto flush = [&] {
    if (token.empty()) return;
    counts[mix64(fnv1a64(token, seed_)) % dimension_] += 1.0;
    ++tokens;
    token.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      token.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else {
      flush();
    }
  }
  flush();
  if (tokens == 0) throw EmbeddingError("text has no alphanumeric tokens");

  double sum = 0.0;
  for (double v : counts) sum += v * v;
  const double norm = std::sqrt(sum);
  for (double& v : counts) v /= norm;
  return EmbeddingVector(std::move(counts));
}

std::string HashingEmbedder::identifier() const {
  return "hash-bow-d" + std::to_string(dimension_) + "-s" + to_hex(seed_);
}

// ---------------------------------------------------------------------------

HttpSettings embed_settings_from_env() {
  HttpSettings settings;
  const char* url = std::getenv("RACG_EMBED_URL");
  if (url == nullptr || *url == '\0') throw ConfigError("RACG_EMBED_URL is not set");
  settings.url = url;
  if (const char* key = std::getenv("RACG_EMBED_KEY")) settings.api_key = key;
  const char* model = std::getenv("RACG_EMBED_MODEL");
  settings.model = model != nullptr && *model != '\0' ? model : "jina-embeddings-v3";
  return settings;
}

HttpEmbedder::HttpEmbedder(HttpSettings settings) : settings_(std::move(settings)) {
  if (settings_.url.empty()) throw ConfigError("embedder needs an endpoint URL");
}

EmbeddingVector HttpEmbedder::embed(std::string_view text) const {
  const json body{{"model", settings_.model}, {"input", json::array({std::string(text)})}};
  const std::string raw = detail::post_json(settings_, body.dump());
  try {
    const json reply = json::parse(raw);
    return EmbeddingVector(reply.at("data").at(0).at("embedding").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what(), 1);
  }
}

// ---------------------------------------------------------------------------

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw EmbeddingError("dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                         std::to_string(b.dimension()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw EmbeddingError("cosine of a zero vector");
  // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): for a == b this is exactly
  // na, so self-similarity is exactly 1.
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

VectorIndex::VectorIndex(std::size_t dimension, std::string embedder_id)
    : dimension_(dimension), embedder_id_(std::move(embedder_id)) {}

void VectorIndex::add(std::string id, EmbeddingVector vector) {
  if (dimension_ == 0) dimension_ = vector.dimension();
  if (vector.dimension() != dimension_) {
    throw EmbeddingError("item " + id + " has dimension " + std::to_string(vector.dimension()) +
                         ", index expects " + std::to_string(dimension_));
  }
  if (!ids_.insert(id).second) throw ValidationError("duplicate index item id " + id);
  items_.push_back(Item{std::move(id), std::move(vector)});
}

VectorIndex build_index(std::span<const std::string> ids, std::span<const std::string> texts,
                        const Embedder& embedder) {
  if (ids.size() != texts.size()) throw ValidationError("ids and texts differ in length");
  VectorIndex index(0, embedder.identifier());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EmbeddingVector v;
    try {
      v = embed(texts[i], embedder);
    } catch (const EmbeddingError& e) {
      throw EmbeddingError("embedding " + ids[i] + ": " + e.what());
    }
    index.add(ids[i], std::move(v));
  }
  return index;
}

std::vector<ScoredId> top_k(const EmbeddingVector& query, const VectorIndex& index, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (index.empty()) throw ValidationError("top_k over an empty index");
  if (query.dimension() != index.dimension()) {
    throw EmbeddingError("query dimension " + std::to_string(query.dimension()) +
                         " does not match index dimension " + std::to_string(index.dimension()));
  }
  const auto& items = index.items();
  std::vector<double> scores(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) scores[i] = cosine(query, items[i].vector);

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), items.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<ScoredId> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back({items[order[i]].id, scores[order[i]]});
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::filesystem::path vectors_path(const std::filesystem::path& stem) {
  return std::filesystem::path(stem.string() + ".vec");
}

std::filesystem::path manifest_path(const std::filesystem::path& stem) {
  return std::filesystem::path(stem.string() + ".manifest.json");
}

namespace {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

void append_le(std::string& out, double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xFF));
    bits >>= 8;
  }
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_index(const VectorIndex& index, const std::filesystem::path& stem) {
  std::string blob;
  blob.reserve(index.size() * index.dimension() * 8);
  json ids = json::array();
  for (const auto& item : index.items()) {
    ids.push_back(item.id);
    for (double v : item.vector.values()) append_le(blob, v);
  }
  const json manifest{{"schema", "codeguard.index"},
                      {"version", 1},
                      {"dimension", index.dimension()},
                      {"count", index.size()},
                      {"embedder", index.embedder_id()},
                      {"encoding", "f64le"},
                      {"ids", std::move(ids)}};
  detail::write_file(vectors_path(stem), blob);
  detail::write_file(manifest_path(stem), manifest.dump(1) + "\n");
}

VectorIndex load_index(const std::filesystem::path& stem) {
  if (stem.empty()) throw ParseError("empty index path", 0);
  json manifest;
  try {
    manifest = json::parse(detail::read_file(manifest_path(stem)));
  } catch (const json::exception& e) {
    throw ParseError("malformed index manifest: " + std::string(e.what()), 0);
  }
  std::size_t dimension = 0;
  std::size_t count = 0;
  std::vector<std::string> ids;
  std::string embedder;
  try {
    if (manifest.at("encoding").get<std::string>() != "f64le") {
      throw ParseError("unsupported vector encoding", 0);
    }
    dimension = manifest.at("dimension").get<std::size_t>();
    count = manifest.at("count").get<std::size_t>();
    ids = manifest.at("ids").get<std::vector<std::string>>();
    embedder = manifest.at("embedder").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError("malformed index manifest: " + std::string(e.what()), 0);
  }
  if (ids.size() != count) throw ParseError("manifest id count differs from count", 0);

  const std::string blob = detail::read_file(vectors_path(stem));
  if (blob.size() != count * dimension * 8) {
    throw ParseError("vector sidecar has " + std::to_string(blob.size()) + " bytes, expected " +
                         std::to_string(count * dimension * 8),
                     0);
  }
  VectorIndex index(dimension, embedder);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> values(dimension);
    for (std::size_t d = 0; d < dimension; ++d) {
      values[d] = read_le(blob.data() + (i * dimension + d) * 8);
    }
    index.add(ids[i], EmbeddingVector(std::move(values)));
  }
  return index;
}

}  // namespace codeguard
