#include "codeguard/hardener.hpp"

#include <algorithm>
#include <unordered_map>

#include "codeguard/errors.hpp"
#include "codeguard/prompts.hpp"
#include "codeguard/tokenize.hpp"

namespace codeguard {

std::vector<SubTask> single_sub_task(std::string_view query) {
  return {SubTask{0, std::string(query)}};
}

std::vector<SubTask> decompose(std::string_view query, CompletionBackend& backend) {
  const std::string response = complete(render_decomposition_prompt(query), backend);
  try {
    return parse_decomposition(response);
  } catch (const DecompositionError&) {
    return single_sub_task(query);
  }
}

std::vector<SubTaskRetrieval> retrieve_per_subtask(const std::vector<SubTask>& sub_tasks,
                                                   const KnowledgeBase& base,
                                                   const Embedder& embedder, int k_prime) {
  if (base.empty()) throw ValidationError("knowledge base is empty");
  const VectorIndex& index = base.index();
  std::vector<SubTaskRetrieval> out;
  out.reserve(sub_tasks.size());
  for (const auto& sub_task : sub_tasks) {
    EmbeddingVector query;
    try {
      query = embed(sub_task.description, embedder);
    } catch (const EmbeddingError& e) {
      throw EmbeddingError("sub-task " + std::to_string(sub_task.index) + ": " + e.what());
    }
    out.push_back(SubTaskRetrieval{sub_task, top_k(query, index, k_prime)});
  }
  return out;
}

namespace {

double sum_ascending(std::vector<double> weights) {
  std::sort(weights.begin(), weights.end());
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

}  // namespace

double aggregate_weight(const SubTaskRetrieval& retrieval, const KnowledgeBase& base,
                        const WeightTable& table) {
  std::vector<double> weights;
  for (const auto& e : retrieval.entries) weights.push_back(table.weight_for(base.find(e.id).cwe_id));
  return sum_ascending(std::move(weights));
}

std::vector<RankedSubTask> weigh_and_rank(
    const std::vector<SubTaskRetrieval>& retrievals,
    const std::function<std::string(const std::string&)>& cwe_of, const WeightTable& table) {
  std::vector<RankedSubTask> ranked;
  ranked.reserve(retrievals.size());
  for (const auto& r : retrievals) {
    std::vector<double> weights;
    for (const auto& e : r.entries) weights.push_back(table.weight_for(cwe_of(e.id)));
    ranked.push_back(RankedSubTask{r.sub_task, r, sum_ascending(std::move(weights))});
  }
  rank_sub_tasks(ranked);
  return ranked;
}

std::vector<RankedSubTask> weigh_and_rank(const std::vector<SubTaskRetrieval>& retrievals,
                                          const KnowledgeBase& base, const WeightTable& table) {
  return weigh_and_rank(
      retrievals, [&](const std::string& id) { return base.find(id).cwe_id; }, table);
}

SecurityContext filter_top_k(const std::vector<RankedSubTask>& ranked, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  SecurityContext context;
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  context.sections.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));
  return context;
}

std::vector<SecurityKnowledgeEntry> collect_knowledge(const SecurityContext& context,
                                                      const KnowledgeBase& base) {
  std::vector<SecurityKnowledgeEntry> out;
  for (const auto& id : context.entry_ids()) out.push_back(base.find(id));
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

void append_code_block(std::string& out, std::string_view language, std::string_view code) {
  out += "```";
  out += language;
  out += '\n';
  out += code;
  if (!code.empty() && code.back() != '\n') out += '\n';
  out += "```\n";
}

}  // namespace

std::string assemble_prompt(const PromptBundle& bundle) {
  std::unordered_map<std::string, const SecurityKnowledgeEntry*> knowledge;
  for (const auto& e : bundle.knowledge) knowledge.emplace(e.id, &e);

  std::string out;
  out += prompts::kQueryHeading;
  out += '\n';
  out += bundle.query;
  out += "\n\n";

  if (!bundle.code_examples.empty()) {
    out += prompts::kExamplesHeading;
    out += '\n';
    for (std::size_t i = 0; i < bundle.code_examples.size(); ++i) {
      const auto& ex = bundle.code_examples[i];
      out += "Example " + std::to_string(i + 1) + ": " + ex.summary + "\n";
      append_code_block(out, ex.language, ex.code);
      out += '\n';
    }
  }

  if (!bundle.security_context.empty()) {
    out += prompts::kSecurityHeading;
    out += '\n';
    out += prompts::kSecurityPreamble;
    out += "\n\n";
    const auto& sections = bundle.security_context.sections;
    for (std::size_t s = 0; s < sections.size(); ++s) {
      const auto n = std::to_string(s + 1);
      out += "Sub-task " + n + ": " + sections[s].sub_task.description + "\n";
      const auto& entries = sections[s].retrieval.entries;
      for (std::size_t e = 0; e < entries.size(); ++e) {
        auto it = knowledge.find(entries[e].id);
        if (it == knowledge.end()) {
          throw ValidationError("prompt bundle lacks knowledge entry " + entries[e].id);
        }
        const SecurityKnowledgeEntry& entry = *it->second;
        out += "Security knowledge " + n + "." + std::to_string(e + 1) + " (" + entry.cwe_id +
               "):\n";
        out += "Root cause: " + entry.root_cause_desc + "\n";
        if (!entry.root_cause_code.empty()) {
          append_code_block(out, entry.language, entry.root_cause_code);
        }
        out += "Fixing pattern: " + entry.fix_desc + "\n";
        if (!entry.fix_code.empty()) append_code_block(out, entry.language, entry.fix_code);
      }
      out += '\n';
    }
  }

  out += prompts::kAnswerInstruction;
  out += '\n';
  return out;
}

PromptBundle harden(std::string_view query, const KnowledgeBase& base,
                    const HardenerConfig& config, CompletionBackend& backend,
                    const Embedder& embedder, std::vector<CodeExample> examples,
                    const HardenOptions& options) {
  config.validate();
  if (base.empty()) throw ValidationError("knowledge base is empty");
  const auto sub_tasks = options.decompose ? decompose(query, backend) : single_sub_task(query);
  const auto retrievals = retrieve_per_subtask(sub_tasks, base, embedder, config.k_prime);
  const auto ranked = weigh_and_rank(retrievals, base, config.weight_table);

  PromptBundle bundle;
  bundle.query = std::string(query);
  bundle.code_examples = std::move(examples);
  bundle.security_context = filter_top_k(ranked, config.k);
  bundle.knowledge = collect_knowledge(bundle.security_context, base);
  return bundle;
}

std::size_t estimate_tokens(std::string_view text) { return code_tokens(text).size(); }

std::size_t fit_to_budget(PromptBundle& bundle, std::size_t budget_tokens) {
  std::size_t dropped = 0;
  while (!bundle.security_context.empty() &&
         estimate_tokens(assemble_prompt(bundle)) > budget_tokens) {
    bundle.security_context.sections.pop_back();
    ++dropped;
  }
  if (dropped > 0) {
    const auto kept = bundle.security_context.entry_ids();
    std::erase_if(bundle.knowledge, [&](const SecurityKnowledgeEntry& e) {
      return std::find(kept.begin(), kept.end(), e.id) == kept.end();
    });
  }
  return dropped;
}

}  // namespace codeguard
