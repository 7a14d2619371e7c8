#pragma once

// Shared domain types for the hardening pipeline.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codeguard {

inline constexpr std::string_view kUnknownCwe = "CWE-UNKNOWN";

// Canonicalizes a CWE identifier: "cwe-0476" -> "CWE-476".
// Throws ValidationError for anything that is not "CWE-<digits>" or the
// unknown sentinel (e.g. "cwe476", "CWE-", "476").
std::string normalize_cwe_id(std::string_view raw);

// One CVE instance: vulnerable version, fixed version, CVE description and
// CWE classification.
struct VulnerabilityRecord {
  std::string id;
  std::string vulnerable_code;
  std::string fixed_code;
  std::string cve_description;
  std::string cwe_id;
  std::string language;

  bool operator==(const VulnerabilityRecord&) const = default;
};

// Validates the invariants of a single record and returns it with its CWE id
// canonicalized and language lowercased.
VulnerabilityRecord validated(VulnerabilityRecord record);

// Rejects duplicate ids within a dataset.
void validate_dataset(const std::vector<VulnerabilityRecord>& records);

// A (functionality, root cause, fixing pattern) triple.
struct SecurityKnowledgeEntry {
  std::string id;
  std::string source_vuln_id;
  std::string cwe_id;
  std::string language;
  std::string functionality;  // retrieval key
  std::string root_cause_desc;
  std::string root_cause_code;
  std::string fix_desc;
  std::string fix_code;

  bool operator==(const SecurityKnowledgeEntry&) const = default;
};

SecurityKnowledgeEntry validated(SecurityKnowledgeEntry entry);

struct SubTask {
  int index = 0;
  std::string description;

  bool operator==(const SubTask&) const = default;
};

// Checks non-empty descriptions and contiguous 0..n-1 indices.
void validate_decomposition(const std::vector<SubTask>& sub_tasks);

struct CodeExample {
  std::string id;
  std::string code;
  std::string summary;  // embedded for retrieval
  std::string language;
  // Set only on examples injected by a poisoning attack. Evaluation
  // bookkeeping; retrieval code must never branch on it.
  bool tainted = false;

  bool operator==(const CodeExample&) const = default;
};

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

// Top-k' knowledge entries for one sub-task, best first.
struct SubTaskRetrieval {
  SubTask sub_task;
  std::vector<ScoredId> entries;

  bool operator==(const SubTaskRetrieval&) const = default;
};

struct RankedSubTask {
  SubTask sub_task;
  SubTaskRetrieval retrieval;
  double aggregate_weight = 0.0;

  bool operator==(const RankedSubTask&) const = default;
};

// Aggregate weights closer than this (relative to the larger one) count as
// equal when ranking. Rounding in the weight sums then cannot reorder
// sub-tasks when the table is rescaled.
inline constexpr double kWeightTieTolerance = 1e-9;

bool weights_tie(double a, double b);

// Strict ordering on exact values: higher aggregate weight first, then lower
// sub-task index.
bool ranks_before(const RankedSubTask& a, const RankedSubTask& b);

// Sorts by ranks_before, then reorders each run of tied weights (as judged
// by weights_tie against the run's largest weight) by sub-task index.
void rank_sub_tasks(std::vector<RankedSubTask>& ranked);

// The kept sub-tasks with their knowledge, in ranked order.
struct SecurityContext {
  std::vector<RankedSubTask> sections;

  bool empty() const noexcept { return sections.empty(); }
  // Union of the entry ids across sections, in first-appearance order.
  std::vector<std::string> entry_ids() const;

  bool operator==(const SecurityContext&) const = default;
};

struct PromptBundle {
  std::string query;
  std::vector<CodeExample> code_examples;
  SecurityContext security_context;
  // Content of every entry referenced by security_context (S_Q), in
  // SecurityContext::entry_ids() order, so rendering needs nothing else.
  std::vector<SecurityKnowledgeEntry> knowledge;

  bool operator==(const PromptBundle&) const = default;
};

// CWE id -> likelihood that the weakness shows up in generated code.
class WeightTable {
 public:
  static constexpr double kDefaultWeight = 0.01;

  WeightTable() = default;
  explicit WeightTable(double default_weight);

  // Table with the frequencies reported for LLM-generated code.
  static WeightTable builtin();

  // Converts a percentage frequency (e.g. 40.24) to a weight rounded to two
  // decimals (0.40).
  static double weight_from_percent(double percent);

  void set(std::string_view cwe_id, double weight);
  void set_default(double weight);
  double weight_for(std::string_view cwe_id) const;
  double default_weight() const noexcept { return default_weight_; }
  const std::map<std::string, double>& entries() const noexcept { return entries_; }

  // Every weight (including the default) multiplied by factor. The result
  // may exceed 1 and is meant for analysis only, not for configuration.
  WeightTable scaled(double factor) const;

  bool operator==(const WeightTable&) const = default;

 private:
  std::map<std::string, double> entries_;
  double default_weight_ = kDefaultWeight;
};

struct HardenerConfig {
  int k_prime = 2;  // knowledge entries retrieved per sub-task
  int k = 5;        // sub-tasks kept after re-ranking
  WeightTable weight_table = WeightTable::builtin();

  void validate() const;
};

enum class PoisonMode { ScenarioI, ScenarioII };

std::string_view to_string(PoisonMode mode);
PoisonMode poison_mode_from_string(std::string_view text);

struct PoisonConfig {
  PoisonMode mode = PoisonMode::ScenarioI;
  int m = 5;                // Scenario I: injections per query
  double p_percent = 10.0;  // Scenario II: share of K treated as representative
  std::uint64_t cluster_seed = 0;

  void validate() const;
};

struct Finding {
  std::string rule_id;
  std::string cwe_id;
  int line = 1;
  std::string excerpt;

  bool operator==(const Finding&) const = default;
};

struct CaseResult {
  std::string case_id;
  bool secure = false;
  bool scored = true;
  bool hardened = false;
  std::optional<double> similarity;
  std::vector<Finding> findings;
  std::string error;

  bool operator==(const CaseResult&) const = default;
};

struct EvalReport {
  int total_cases = 0;
  int secure_cases = 0;
  int unscored_cases = 0;
  double security_rate = 0.0;            // percent of scored cases
  std::optional<double> mean_similarity;  // absent without references
  std::string similarity_metric = "sim-bleu-proxy";
  std::vector<CaseResult> per_case;

  bool operator==(const EvalReport&) const = default;
};

}  // namespace codeguard
