#pragma once

// Online hardening: decompose a query, retrieve security knowledge per
// sub-task, re-rank sub-tasks by CWE risk and render the augmented prompt.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "codeguard/embedding.hpp"
#include "codeguard/gateway.hpp"
#include "codeguard/kb.hpp"
#include "codeguard/model.hpp"

namespace codeguard {

// Asks the backend for sub-tasks. A response without any parsable sub-task
// degrades to a single sub-task holding the whole query; transport errors
// propagate.
std::vector<SubTask> decompose(std::string_view query, CompletionBackend& backend);

// The undecomposed query as one sub-task.
std::vector<SubTask> single_sub_task(std::string_view query);

std::vector<SubTaskRetrieval> retrieve_per_subtask(const std::vector<SubTask>& sub_tasks,
                                                   const KnowledgeBase& base,
                                                   const Embedder& embedder, int k_prime);

// Sum of the table weights of the retrieval's entries. Weights are added in
// ascending order so the result depends only on the multiset of weights.
double aggregate_weight(const SubTaskRetrieval& retrieval, const KnowledgeBase& base,
                        const WeightTable& table);

// W for every sub-task, sorted by W descending then sub-task index.
std::vector<RankedSubTask> weigh_and_rank(const std::vector<SubTaskRetrieval>& retrievals,
                                          const KnowledgeBase& base, const WeightTable& table);

// Same, with CWE ids supplied directly (entry id -> CWE id lookup).
std::vector<RankedSubTask> weigh_and_rank(
    const std::vector<SubTaskRetrieval>& retrievals,
    const std::function<std::string(const std::string&)>& cwe_of, const WeightTable& table);

SecurityContext filter_top_k(const std::vector<RankedSubTask>& ranked, int k);

// Q, then the code examples (omitted when there are none), then one section
// per kept sub-task with the root cause and fixing pattern of each of its
// entries. Throws ValidationError if a referenced entry is missing from
// bundle.knowledge.
std::string assemble_prompt(const PromptBundle& bundle);

// The entries of context.entry_ids(), looked up in base.
std::vector<SecurityKnowledgeEntry> collect_knowledge(const SecurityContext& context,
                                                      const KnowledgeBase& base);

struct HardenOptions {
  bool decompose = true;  // false: the whole query is the only sub-task
};

PromptBundle harden(std::string_view query, const KnowledgeBase& base,
                    const HardenerConfig& config, CompletionBackend& backend,
                    const Embedder& embedder, std::vector<CodeExample> examples,
                    const HardenOptions& options = {});

// Rough token count used for the context budget: identifiers, numbers and
// punctuation each count as one token.
std::size_t estimate_tokens(std::string_view text);

// Drops the lowest-ranked security sections until the rendered prompt fits in
// `budget_tokens`. Returns the number of sections dropped. The query and
// code examples are never truncated.
std::size_t fit_to_budget(PromptBundle& bundle, std::size_t budget_tokens);

}  // namespace codeguard
