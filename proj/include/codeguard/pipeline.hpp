#pragma once

// Retrieval-augmented generation flow with optional hardening.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codeguard/embedding.hpp"
#include "codeguard/gateway.hpp"
#include "codeguard/hardener.hpp"
#include "codeguard/kb.hpp"
#include "codeguard/model.hpp"

namespace codeguard {

struct GenerationRecord {
  std::string case_id;
  std::string query;
  std::string language;  // copied from the batch case; selects detector rules
  std::vector<std::string> retrieved_example_ids;
  std::vector<std::string> security_entry_ids;  // empty unless hardened
  std::string rendered_prompt;
  std::string generated_code;
  bool hardened = false;
  std::string error;  // non-empty when the generation call failed

  bool operator==(const GenerationRecord&) const = default;
};

struct BatchCase {
  std::string case_id;
  std::string query;
  std::string language;
  std::optional<std::string> reference_code;

  bool operator==(const BatchCase&) const = default;
};

struct GenerationSettings {
  HardenerConfig hardener;
  int n_examples = 1;
  double temperature = 0.0;
  int max_new_tokens = 4096;
  // Prompt plus completion must fit here; security sections are dropped
  // lowest-ranked first when they do not.
  std::size_t context_window = 8192;
  bool decompose = true;

  std::size_t prompt_budget() const;
};

// Embeds each example's summary; item order = corpus order.
VectorIndex build_code_index(const std::vector<CodeExample>& corpus, const Embedder& embedder);

// Top-n examples by cosine between the query and the summaries. n = 0
// returns nothing (generation without functional retrieval).
std::vector<CodeExample> retrieve_examples(std::string_view query, const VectorIndex& index,
                                           const std::vector<CodeExample>& corpus, int n,
                                           const Embedder& embedder);

// First fenced code block of a model response, or the whole response.
std::string extract_code(std::string_view response);

struct GenerationContext {
  const KnowledgeBase* base = nullptr;  // required when hardening
  const VectorIndex* code_index = nullptr;
  const std::vector<CodeExample>* corpus = nullptr;
  CompletionBackend* backend = nullptr;
  const Embedder* embedder = nullptr;
};

GenerationRecord generate(const BatchCase& test_case, const GenerationContext& context,
                          const GenerationSettings& settings, bool harden_flag);

// Runs every case once per requested mode. Records come out grouped by case,
// unhardened before hardened.
std::vector<GenerationRecord> run_batch(const std::vector<BatchCase>& cases,
                                        const GenerationContext& context,
                                        const GenerationSettings& settings, bool unhardened,
                                        bool hardened, int jobs = 1);

std::vector<BatchCase> load_batch(const std::filesystem::path& path);
void save_batch(const std::vector<BatchCase>& cases, const std::filesystem::path& path);

void save_generation_records(const std::vector<GenerationRecord>& records,
                             const std::filesystem::path& path);
std::vector<GenerationRecord> load_generation_records(const std::filesystem::path& path);

}  // namespace codeguard
