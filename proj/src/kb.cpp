#include "codeguard/kb.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "codeguard/diff.hpp"
#include "codeguard/errors.hpp"
#include "codeguard/hash.hpp"
#include "jsonl.hpp"
#include "parallel.hpp"

namespace codeguard {

using detail::json;

namespace {

constexpr std::string_view kEntryMarker = "===ENTRY===";
constexpr std::array<std::string_view, 5> kLabels = {
    "FUNCTIONALITY", "ROOT_CAUSE_DESC", "ROOT_CAUSE_CODE", "FIX_DESC", "FIX_CODE"};

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

bool is_fence(std::string_view line) { return trim(line).starts_with("```"); }

// Returns the label index and the text after "LABEL:" when the line opens a
// field.
std::optional<std::pair<std::size_t, std::string_view>> label_of(std::string_view line) {
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (line.starts_with(kLabels[i]) && line.size() > kLabels[i].size() &&
        line[kLabels[i].size()] == ':') {
      return std::pair{i, line.substr(kLabels[i].size() + 1)};
    }
  }
  return std::nullopt;
}

// Code fields: the content of the first fenced block if there is one,
// otherwise the trimmed text.
std::string code_value(const std::vector<std::string_view>& lines) {
  auto open = std::find_if(lines.begin(), lines.end(), is_fence);
  if (open == lines.end()) {
    std::string joined;
    for (auto l : lines) {
      if (!joined.empty()) joined += '\n';
      joined += l;
    }
    return std::string(trim(joined));
  }
  std::string body;
  for (auto it = open + 1; it != lines.end() && !is_fence(*it); ++it) {
    body += *it;
    body += '\n';
  }
  if (!body.empty()) body.pop_back();
  return body;
}

std::string text_value(const std::vector<std::string_view>& lines) {
  std::string joined;
  for (auto l : lines) {
    if (!joined.empty()) joined += '\n';
    joined += l;
  }
  return std::string(trim(joined));
}

SecurityKnowledgeEntry parse_block(const std::vector<std::string_view>& block,
                                   std::string_view response) {
  std::map<std::size_t, std::vector<std::string_view>> fields;
  std::optional<std::size_t> current;
  bool in_fence = false;
  for (auto line : block) {
    if (!in_fence) {
      if (auto label = label_of(line)) {
        current = label->first;
        if (fields.contains(*current)) {
          throw ExtractionError("field " + std::string(kLabels[*current]) + " repeated",
                                std::string(response));
        }
        auto& field = fields[*current];
        if (!trim(label->second).empty()) field.push_back(trim(label->second));
        if (is_fence(label->second)) in_fence = !in_fence;
        continue;
      }
    }
    if (is_fence(line)) in_fence = !in_fence;
    if (!current) {
      if (!trim(line).empty()) {
        throw ExtractionError("text before the first field of an entry", std::string(response));
      }
      continue;
    }
    fields[*current].push_back(line);
  }

  auto get = [&](std::size_t i) -> const std::vector<std::string_view>& {
    static const std::vector<std::string_view> kEmpty;
    auto it = fields.find(i);
    return it == fields.end() ? kEmpty : it->second;
  };
  SecurityKnowledgeEntry entry;
  entry.functionality = text_value(get(0));
  entry.root_cause_desc = text_value(get(1));
  entry.root_cause_code = code_value(get(2));
  entry.fix_desc = text_value(get(3));
  entry.fix_code = code_value(get(4));
  if (entry.functionality.empty() || entry.root_cause_desc.empty() || entry.fix_desc.empty()) {
    throw ExtractionError("entry lacks FUNCTIONALITY, ROOT_CAUSE_DESC or FIX_DESC",
                          std::string(response));
  }
  return entry;
}

json to_json(const SecurityKnowledgeEntry& e) {
  return json{{"id", e.id},
              {"source_vuln_id", e.source_vuln_id},
              {"cwe_id", e.cwe_id},
              {"language", e.language},
              {"functionality", e.functionality},
              {"root_cause_desc", e.root_cause_desc},
              {"root_cause_code", e.root_cause_code},
              {"fix_desc", e.fix_desc},
              {"fix_code", e.fix_code}};
}

SecurityKnowledgeEntry entry_from_json(const json& j) {
  SecurityKnowledgeEntry e;
  e.id = detail::get_string(j, "id");
  e.source_vuln_id = detail::get_string(j, "source_vuln_id");
  e.cwe_id = detail::get_string(j, "cwe_id");
  e.language = detail::get_string(j, "language");
  e.functionality = detail::get_string(j, "functionality");
  e.root_cause_desc = detail::get_string(j, "root_cause_desc");
  e.root_cause_code = detail::get_string(j, "root_cause_code");
  e.fix_desc = detail::get_string(j, "fix_desc");
  e.fix_code = detail::get_string(j, "fix_code");
  return validated(std::move(e));
}

}  // namespace

std::vector<SecurityKnowledgeEntry> parse_extraction_envelope(std::string_view response,
                                                              const VulnerabilityRecord& record) {
  const auto lines = lines_of(response);
  std::vector<std::vector<std::string_view>> blocks;
  for (auto line : lines) {
    if (trim(line) == kEntryMarker) {
      blocks.emplace_back();
    } else if (!blocks.empty()) {
      blocks.back().push_back(line);
    }
  }
  if (blocks.empty()) {
    throw ExtractionError("response contains no " + std::string(kEntryMarker) + " block",
                          std::string(response));
  }
  std::vector<SecurityKnowledgeEntry> entries;
  for (const auto& block : blocks) {
    auto entry = parse_block(block, response);
    entry.id = record.id + "#" + std::to_string(entries.size());
    entry.source_vuln_id = record.id;
    entry.cwe_id = record.cwe_id;
    entry.language = record.language;
    entries.push_back(validated(std::move(entry)));
  }
  return entries;
}

std::vector<SecurityKnowledgeEntry> extract_entries(const VulnerabilityRecord& record,
                                                    CompletionBackend& backend) {
  const auto diff = compute_diff(record.vulnerable_code, record.fixed_code);
  const std::string response = complete(render_extraction_prompt(record, diff), backend);
  return parse_extraction_envelope(response, record);
}

// ---------------------------------------------------------------------------

KnowledgeBase::KnowledgeBase(std::vector<SecurityKnowledgeEntry> entries, VectorIndex index)
    : entries_(std::move(entries)), index_(std::move(index)) {
  if (index_.size() != entries_.size()) {
    throw ValidationError("knowledge base has " + std::to_string(entries_.size()) +
                          " entries but " + std::to_string(index_.size()) + " vectors");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!position_.emplace(entries_[i].id, i).second) {
      throw ValidationError("duplicate knowledge entry id " + entries_[i].id);
    }
    if (index_.items()[i].id != entries_[i].id) {
      throw ValidationError("vector index order differs from entry order at " + entries_[i].id);
    }
  }
}

const std::vector<SecurityKnowledgeEntry>& KnowledgeBase::entries() const {
  ++*reads_;
  return entries_;
}

const VectorIndex& KnowledgeBase::index() const {
  ++*reads_;
  return index_;
}

const SecurityKnowledgeEntry& KnowledgeBase::find(std::string_view id) const {
  ++*reads_;
  auto it = position_.find(std::string(id));
  if (it == position_.end()) throw ValidationError("no knowledge entry " + std::string(id));
  return entries_[it->second];
}

BuildResult build_knowledge_base(const std::vector<VulnerabilityRecord>& input,
                                 CompletionBackend& backend, const Embedder& embedder,
                                 const BuildOptions& options) {
  if (input.empty()) throw BuildError("no vulnerability records to build from");
  validate_dataset(input);

  std::vector<VulnerabilityRecord> records;
  for (const auto& r : input) {
    if (!options.include || options.include(r)) records.push_back(validated(r));
  }

  struct Outcome {
    std::vector<SecurityKnowledgeEntry> entries;
    std::optional<SkipRecord> skip;
  };
  std::vector<Outcome> outcomes(records.size());
  detail::parallel_for(records.size(), options.jobs, [&](std::size_t i) {
    const auto& record = records[i];
    try {
      outcomes[i].entries = extract_entries(record, backend);
    } catch (const ExtractionError& e) {
      outcomes[i].skip = SkipRecord{record.id, "extraction", to_hex(fnv1a64(e.raw_response()))};
    } catch (const ValidationError&) {
      outcomes[i].skip = SkipRecord{record.id, "validation", to_hex(fnv1a64(""))};
    } catch (const TransportError&) {
      outcomes[i].skip = SkipRecord{record.id, "transport", to_hex(fnv1a64(""))};
    }
  });

  BuildResult result;
  std::vector<SecurityKnowledgeEntry> entries;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].skip) {
      spdlog::warn("skipping {}: {} failure", outcomes[i].skip->record_id,
                   outcomes[i].skip->error_class);
      result.skipped.push_back(*outcomes[i].skip);
      continue;
    }
    for (auto& e : outcomes[i].entries) entries.push_back(std::move(e));
  }
  if (entries.empty()) throw BuildError("no knowledge entries could be extracted");

  std::vector<std::string> ids;
  std::vector<std::string> texts;
  for (const auto& e : entries) {
    ids.push_back(e.id);
    texts.push_back(e.functionality);
  }
  auto index = build_index(ids, texts, embedder);
  result.base = KnowledgeBase(std::move(entries), std::move(index));
  return result;
}

// ---------------------------------------------------------------------------
// Persistence

void save_base(const KnowledgeBase& base, const std::filesystem::path& path) {
  std::vector<json> lines;
  lines.push_back(json{{"schema", "codeguard.kb"},
                       {"version", kKnowledgeBaseSchemaVersion},
                       {"embedder", base.index_ref()},
                       {"count", base.size()}});
  for (const auto& e : base.entries()) lines.push_back(to_json(e));
  detail::write_json_lines(path, lines);
  save_index(base.index(), path);
}

KnowledgeBase load_base(const std::filesystem::path& path) {
  std::vector<SecurityKnowledgeEntry> entries;
  bool header_seen = false;
  std::size_t expected = 0;
  std::string embedder;
  detail::for_each_json_line(path, [&](const json& line, std::size_t number) {
    if (!header_seen) {
      if (line.value("schema", "") != "codeguard.kb") {
        throw ParseError("missing knowledge-base header", number);
      }
      if (line.value("version", 0) != kKnowledgeBaseSchemaVersion) {
        throw ParseError("unsupported knowledge-base schema version", number);
      }
      expected = line.at("count").get<std::size_t>();
      embedder = line.at("embedder").get<std::string>();
      header_seen = true;
      return;
    }
    entries.push_back(entry_from_json(line));
  });
  if (!header_seen) throw ParseError(path.string() + ": empty knowledge-base file", 0);
  if (entries.size() != expected) {
    throw ParseError(path.string() + ": header announces " + std::to_string(expected) +
                         " entries, found " + std::to_string(entries.size()),
                     0);
  }
  auto index = load_index(path);
  if (index.embedder_id() != embedder) {
    throw ParseError("index embedder " + index.embedder_id() + " differs from base embedder " +
                         embedder,
                     0);
  }
  try {
    return KnowledgeBase(std::move(entries), std::move(index));
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0);
  }
}

void save_skip_log(const std::vector<SkipRecord>& skipped, const std::filesystem::path& path) {
  std::vector<json> lines;
  for (const auto& s : skipped) {
    lines.push_back(json{{"record_id", s.record_id},
                         {"error_class", s.error_class},
                         {"fingerprint", s.fingerprint}});
  }
  detail::write_json_lines(path, lines);
}

std::vector<SkipRecord> load_skip_log(const std::filesystem::path& path) {
  std::vector<SkipRecord> out;
  detail::for_each_json_line(path, [&](const json& j, std::size_t) {
    out.push_back({detail::get_string(j, "record_id"), detail::get_string(j, "error_class"),
                   detail::get_string(j, "fingerprint")});
  });
  return out;
}

std::vector<VulnerabilityRecord> load_vulnerabilities(const std::filesystem::path& path) {
  std::vector<VulnerabilityRecord> out;
  detail::for_each_json_line(path, [&](const json& j, std::size_t) {
    VulnerabilityRecord r;
    r.id = detail::get_string(j, "id");
    r.vulnerable_code = detail::get_string(j, "vulnerable_code");
    r.fixed_code = detail::get_string(j, "fixed_code");
    r.cve_description = detail::get_string_or(j, "cve_description", "");
    r.cwe_id = detail::get_string_or(j, "cwe_id", std::string(kUnknownCwe));
    r.language = detail::get_string(j, "language");
    out.push_back(validated(std::move(r)));
  });
  try {
    validate_dataset(out);
  } catch (const ValidationError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return out;
}

void save_vulnerabilities(const std::vector<VulnerabilityRecord>& records,
                          const std::filesystem::path& path) {
  std::vector<json> lines;
  for (const auto& r : records) {
    lines.push_back(json{{"id", r.id},
                         {"vulnerable_code", r.vulnerable_code},
                         {"fixed_code", r.fixed_code},
                         {"cve_description", r.cve_description},
                         {"cwe_id", r.cwe_id},
                         {"language", r.language}});
  }
  detail::write_json_lines(path, lines);
}

std::vector<CodeExample> load_corpus(const std::filesystem::path& path, CorpusKind kind) {
  std::vector<CodeExample> out;
  std::unordered_set<std::string> seen;
  detail::for_each_json_line(path, [&](const json& j, std::size_t number) {
    CodeExample ex;
    ex.id = detail::get_string(j, "id");
    ex.code = detail::get_string(j, "code");
    ex.summary = detail::get_string(j, "summary");
    ex.language = detail::get_string(j, "language");
    if (ex.id.empty()) throw ParseError("example without id", number);
    if (!seen.insert(ex.id).second) throw ParseError("duplicate example id " + ex.id, number);
    out.push_back(std::move(ex));
  });
  spdlog::debug("loaded {} {} examples from {}", out.size(),
                kind == CorpusKind::Functional ? "functional" : "vulnerable", path.string());
  return out;
}

void save_corpus(const std::vector<CodeExample>& corpus, const std::filesystem::path& path) {
  std::vector<json> lines;
  for (const auto& ex : corpus) {
    json j{{"id", ex.id}, {"code", ex.code}, {"summary", ex.summary}, {"language", ex.language}};
    if (ex.tainted) j["tainted"] = true;
    lines.push_back(std::move(j));
  }
  detail::write_json_lines(path, lines);
}

}  // namespace codeguard
