#include "codeguard/pipeline.hpp"

#include <unordered_set>

#include "codeguard/errors.hpp"
#include "jsonl.hpp"
#include "parallel.hpp"

namespace codeguard {

using detail::json;

std::size_t GenerationSettings::prompt_budget() const {
  const auto reserved = static_cast<std::size_t>(std::max(0, max_new_tokens));
  return context_window > reserved ? context_window - reserved : 0;
}

VectorIndex build_code_index(const std::vector<CodeExample>& corpus, const Embedder& embedder) {
  if (corpus.empty()) throw ValidationError("code corpus is empty");
  std::vector<std::string> ids;
  std::vector<std::string> summaries;
  ids.reserve(corpus.size());
  summaries.reserve(corpus.size());
  for (const auto& ex : corpus) {
    ids.push_back(ex.id);
    summaries.push_back(ex.summary);
  }
  return build_index(ids, summaries, embedder);
}

std::vector<CodeExample> retrieve_examples(std::string_view query, const VectorIndex& index,
                                           const std::vector<CodeExample>& corpus, int n,
                                           const Embedder& embedder) {
  if (n < 0) throw ValidationError("number of examples must be >= 0");
  if (n == 0) return {};
  if (index.size() != corpus.size()) {
    throw ValidationError("code index and corpus differ in size");
  }
  std::vector<CodeExample> out;
  for (const auto& hit : top_k(embed(query, embedder), index, n)) {
    const auto& items = index.items();
    auto pos = static_cast<std::size_t>(
        std::find_if(items.begin(), items.end(), [&](const auto& it) { return it.id == hit.id; }) -
        items.begin());
    out.push_back(corpus.at(pos));
  }
  return out;
}

std::string extract_code(std::string_view response) {
  auto open = response.find("```");
  if (open == std::string_view::npos) return std::string(response);
  auto body = response.find('\n', open);
  if (body == std::string_view::npos) return std::string(response);
  ++body;
  auto close = response.find("```", body);
  if (close == std::string_view::npos) return std::string(response.substr(body));
  return std::string(response.substr(body, close - body));
}

GenerationRecord generate(const BatchCase& test_case, const GenerationContext& context,
                          const GenerationSettings& settings, bool harden_flag) {
  if (context.backend == nullptr || context.embedder == nullptr) {
    throw ConfigError("generation needs a completion backend and an embedder");
  }
  GenerationRecord record;
  record.case_id = test_case.case_id;
  record.query = test_case.query;
  record.language = test_case.language;
  record.hardened = harden_flag;

  std::vector<CodeExample> examples;
  if (settings.n_examples > 0) {
    if (context.code_index == nullptr || context.corpus == nullptr) {
      throw ConfigError("functional retrieval needs a code index and corpus");
    }
    examples = retrieve_examples(test_case.query, *context.code_index, *context.corpus,
                                 settings.n_examples, *context.embedder);
  }
  for (const auto& ex : examples) record.retrieved_example_ids.push_back(ex.id);

  PromptBundle bundle;
  if (harden_flag) {
    if (context.base == nullptr) throw ConfigError("hardening needs a knowledge base");
    bundle = harden(test_case.query, *context.base, settings.hardener, *context.backend,
                    *context.embedder, std::move(examples), HardenOptions{settings.decompose});
    fit_to_budget(bundle, settings.prompt_budget());
    record.security_entry_ids = bundle.security_context.entry_ids();
  } else {
    bundle.query = test_case.query;
    bundle.code_examples = std::move(examples);
  }
  record.rendered_prompt = assemble_prompt(bundle);

  const auto request =
      render_generation_request(record.rendered_prompt, settings.temperature, settings.max_new_tokens);
  try {
    record.generated_code = extract_code(complete(request, *context.backend));
  } catch (const Error& e) {
    record.generated_code.clear();
    record.error = e.what();
  }
  return record;
}

std::vector<GenerationRecord> run_batch(const std::vector<BatchCase>& cases,
                                        const GenerationContext& context,
                                        const GenerationSettings& settings, bool unhardened,
                                        bool hardened, int jobs) {
  std::vector<std::pair<std::size_t, bool>> work;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (unhardened) work.emplace_back(i, false);
    if (hardened) work.emplace_back(i, true);
  }
  std::vector<GenerationRecord> out(work.size());
  detail::parallel_for(work.size(), jobs, [&](std::size_t w) {
    out[w] = generate(cases[work[w].first], context, settings, work[w].second);
  });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<BatchCase> load_batch(const std::filesystem::path& path) {
  std::vector<BatchCase> out;
  std::unordered_set<std::string> seen;
  detail::for_each_json_line(path, [&](const json& j, std::size_t number) {
    BatchCase c;
    c.case_id = detail::get_string(j, "case_id");
    c.query = detail::get_string(j, "query");
    c.language = detail::get_string_or(j, "language", "");
    if (auto it = j.find("reference_code"); it != j.end() && !it->is_null()) {
      c.reference_code = it->get<std::string>();
    }
    if (!seen.insert(c.case_id).second) throw ParseError("duplicate case id " + c.case_id, number);
    out.push_back(std::move(c));
  });
  return out;
}

void save_batch(const std::vector<BatchCase>& cases, const std::filesystem::path& path) {
  std::vector<json> lines;
  for (const auto& c : cases) {
    json j{{"case_id", c.case_id}, {"query", c.query}, {"language", c.language}};
    if (c.reference_code) j["reference_code"] = *c.reference_code;
    lines.push_back(std::move(j));
  }
  detail::write_json_lines(path, lines);
}

void save_generation_records(const std::vector<GenerationRecord>& records,
                             const std::filesystem::path& path) {
  std::vector<json> lines;
  for (const auto& r : records) {
    json j{{"case_id", r.case_id},
           {"query", r.query},
           {"language", r.language},
           {"retrieved_example_ids", r.retrieved_example_ids},
           {"security_entry_ids", r.security_entry_ids},
           {"rendered_prompt", r.rendered_prompt},
           {"generated_code", r.generated_code},
           {"hardened", r.hardened}};
    if (!r.error.empty()) j["error"] = r.error;
    lines.push_back(std::move(j));
  }
  detail::write_json_lines(path, lines);
}

std::vector<GenerationRecord> load_generation_records(const std::filesystem::path& path) {
  std::vector<GenerationRecord> out;
  detail::for_each_json_line(path, [&](const json& j, std::size_t number) {
    GenerationRecord r;
    r.case_id = detail::get_string(j, "case_id");
    r.query = detail::get_string(j, "query");
    r.language = detail::get_string_or(j, "language", "");
    r.retrieved_example_ids = j.at("retrieved_example_ids").get<std::vector<std::string>>();
    r.security_entry_ids = j.at("security_entry_ids").get<std::vector<std::string>>();
    r.rendered_prompt = detail::get_string(j, "rendered_prompt");
    r.generated_code = detail::get_string(j, "generated_code");
    r.hardened = j.at("hardened").get<bool>();
    r.error = detail::get_string_or(j, "error", "");
    if (!r.hardened && !r.security_entry_ids.empty()) {
      throw ParseError("unhardened record carries security entries", number);
    }
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace codeguard
