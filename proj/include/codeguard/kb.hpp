#pragma once

// Offline construction and persistence of the security knowledge base, plus
// the code corpora (functional and vulnerable) used for retrieval.

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "codeguard/embedding.hpp"
#include "codeguard/gateway.hpp"
#include "codeguard/model.hpp"

namespace codeguard {

inline constexpr int kKnowledgeBaseSchemaVersion = 1;

// Parses the ===ENTRY=== envelope of an extraction response. Entries get ids
// "<record.id>#<ordinal>" (ordinal from 0) and inherit CWE and language from
// the record. Throws ExtractionError on anything malformed.
std::vector<SecurityKnowledgeEntry> parse_extraction_envelope(std::string_view response,
                                                              const VulnerabilityRecord& record);

// Diff, render the extraction prompt, complete, parse.
std::vector<SecurityKnowledgeEntry> extract_entries(const VulnerabilityRecord& record,
                                                    CompletionBackend& backend);

// Security knowledge entries plus the index over their functionality text.
// Reads through entries()/index()/find() are counted so callers can assert
// that a code path never consulted the base.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::vector<SecurityKnowledgeEntry> entries, VectorIndex index);

  const std::vector<SecurityKnowledgeEntry>& entries() const;
  const VectorIndex& index() const;
  // Entry by id; throws ValidationError when absent.
  const SecurityKnowledgeEntry& find(std::string_view id) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& index_ref() const noexcept { return index_.embedder_id(); }

  std::size_t read_count() const noexcept { return reads_->load(); }

  bool operator==(const KnowledgeBase& other) const {
    return entries_ == other.entries_ && index_ == other.index_;
  }

 private:
  std::vector<SecurityKnowledgeEntry> entries_;
  VectorIndex index_;
  std::unordered_map<std::string, std::size_t> position_;
  std::shared_ptr<std::atomic<std::size_t>> reads_ = std::make_shared<std::atomic<std::size_t>>(0);
};

struct SkipRecord {
  std::string record_id;
  std::string error_class;
  std::string fingerprint;  // digest of the failed response text

  bool operator==(const SkipRecord&) const = default;
};

struct BuildOptions {
  // Records for which this returns false are dropped before extraction
  // (benchmark leakage filters and the like).
  std::function<bool(const VulnerabilityRecord&)> include;
  int jobs = 1;
};

struct BuildResult {
  KnowledgeBase base;
  std::vector<SkipRecord> skipped;
};

// Extracts every record (failures are skipped and logged), then embeds the
// functionality text of every entry. Entry order follows record order, then
// ordinal. Throws BuildError when no record yields an entry.
BuildResult build_knowledge_base(const std::vector<VulnerabilityRecord>& records,
                                 CompletionBackend& backend, const Embedder& embedder,
                                 const BuildOptions& options = {});

// `path` holds a header line and one entry per line; the vector index is
// stored alongside (see save_index).
void save_base(const KnowledgeBase& base, const std::filesystem::path& path);
KnowledgeBase load_base(const std::filesystem::path& path);

void save_skip_log(const std::vector<SkipRecord>& skipped, const std::filesystem::path& path);
std::vector<SkipRecord> load_skip_log(const std::filesystem::path& path);

std::vector<VulnerabilityRecord> load_vulnerabilities(const std::filesystem::path& path);
void save_vulnerabilities(const std::vector<VulnerabilityRecord>& records,
                          const std::filesystem::path& path);

enum class CorpusKind { Functional, Vulnerable };

// One example per line: id, code, summary, language. Loaded examples are
// never tainted.
std::vector<CodeExample> load_corpus(const std::filesystem::path& path, CorpusKind kind);
// Writes `tainted: true` for injected examples so poisoned corpora stay
// auditable; load_corpus ignores the flag.
void save_corpus(const std::vector<CodeExample>& corpus, const std::filesystem::path& path);

}  // namespace codeguard
