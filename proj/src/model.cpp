#include "codeguard/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

#include "codeguard/errors.hpp"

namespace codeguard {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void require_non_empty(const std::string& value, std::string_view what,
                       std::string_view owner) {
  if (value.empty()) {
    throw ValidationError(std::string(owner) + ": " + std::string(what) + " is empty");
  }
}

}  // namespace

std::string normalize_cwe_id(std::string_view raw) {
  if (iequals(raw, kUnknownCwe)) return std::string(kUnknownCwe);
  if (raw.size() < 5 || !iequals(raw.substr(0, 4), "CWE-")) {
    throw ValidationError("malformed CWE id '" + std::string(raw) + "'");
  }
  std::string_view digits = raw.substr(4);
  if (!std::all_of(digits.begin(), digits.end(),
                   [](unsigned char c) { return std::isdigit(c); })) {
    throw ValidationError("malformed CWE id '" + std::string(raw) + "'");
  }
  auto first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return "CWE-0";
  return "CWE-" + std::string(digits.substr(first));
}

VulnerabilityRecord validated(VulnerabilityRecord record) {
  require_non_empty(record.id, "id", "vulnerability record");
  if (record.vulnerable_code == record.fixed_code) {
    throw ValidationError("vulnerability record " + record.id +
                          ": vulnerable and fixed code are identical");
  }
  record.cwe_id = normalize_cwe_id(record.cwe_id);
  record.language = lowercase(std::move(record.language));
  return record;
}

void validate_dataset(const std::vector<VulnerabilityRecord>& records) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) {
      throw ValidationError("duplicate vulnerability id " + r.id);
    }
  }
}

SecurityKnowledgeEntry validated(SecurityKnowledgeEntry entry) {
  require_non_empty(entry.id, "id", "knowledge entry");
  require_non_empty(entry.functionality, "functionality", "knowledge entry " + entry.id);
  require_non_empty(entry.root_cause_desc, "root cause description",
                    "knowledge entry " + entry.id);
  require_non_empty(entry.fix_desc, "fix description", "knowledge entry " + entry.id);
  entry.cwe_id = normalize_cwe_id(entry.cwe_id);
  return entry;
}

void validate_decomposition(const std::vector<SubTask>& sub_tasks) {
  if (sub_tasks.empty()) throw ValidationError("decomposition has no sub-tasks");
  for (std::size_t i = 0; i < sub_tasks.size(); ++i) {
    if (sub_tasks[i].index != static_cast<int>(i)) {
      throw ValidationError("sub-task indices must be 0..n-1 without gaps");
    }
    const auto& text = sub_tasks[i].description;
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw ValidationError("sub-task " + std::to_string(i) + ": description is blank");
    }
  }
}

bool ranks_before(const RankedSubTask& a, const RankedSubTask& b) {
  if (a.aggregate_weight != b.aggregate_weight) {
    return a.aggregate_weight > b.aggregate_weight;
  }
  return a.sub_task.index < b.sub_task.index;
}

bool weights_tie(double a, double b) {
  return std::abs(a - b) <= kWeightTieTolerance * std::max(std::abs(a), std::abs(b));
}

void rank_sub_tasks(std::vector<RankedSubTask>& ranked) {
  std::sort(ranked.begin(), ranked.end(), ranks_before);
  auto by_index = [](const RankedSubTask& a, const RankedSubTask& b) {
    return a.sub_task.index < b.sub_task.index;
  };
  for (auto run = ranked.begin(); run != ranked.end();) {
    auto end = std::find_if(run + 1, ranked.end(), [&](const RankedSubTask& r) {
      return !weights_tie(run->aggregate_weight, r.aggregate_weight);
    });
    std::sort(run, end, by_index);
    run = end;
  }
}

std::vector<std::string> SecurityContext::entry_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& section : sections) {
    for (const auto& e : section.retrieval.entries) {
      if (seen.insert(e.id).second) ids.push_back(e.id);
    }
  }
  return ids;
}

WeightTable::WeightTable(double default_weight) { set_default(default_weight); }

WeightTable WeightTable::builtin() {
  // Only the NULL pointer row of the violation-type distribution is
  // reproduced here; extend via the [weights] config section.
  WeightTable table;
  table.set("CWE-476", weight_from_percent(40.24));
  return table;
}

double WeightTable::weight_from_percent(double percent) {
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw ValidationError("frequency percent out of range");
  }
  return std::round(percent) / 100.0;
}

void WeightTable::set(std::string_view cwe_id, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw ValidationError("weight for " + std::string(cwe_id) + " outside [0, 1]");
  }
  entries_[normalize_cwe_id(cwe_id)] = weight;
}

void WeightTable::set_default(double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw ValidationError("default weight outside [0, 1]");
  }
  default_weight_ = weight;
}

double WeightTable::weight_for(std::string_view cwe_id) const {
  std::string key;
  try {
    key = normalize_cwe_id(cwe_id);
  } catch (const ValidationError&) {
    return default_weight_;
  }
  if (key == kUnknownCwe) return default_weight_;
  auto it = entries_.find(key);
  return it == entries_.end() ? default_weight_ : it->second;
}

WeightTable WeightTable::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("scale factor must be positive");
  WeightTable out;
  out.default_weight_ = default_weight_ * factor;
  for (const auto& [cwe, w] : entries_) out.entries_[cwe] = w * factor;
  return out;
}

void HardenerConfig::validate() const {
  if (k_prime < 1) throw ValidationError("k_prime must be >= 1");
  if (k < 1) throw ValidationError("k must be >= 1");
}

std::string_view to_string(PoisonMode mode) {
  return mode == PoisonMode::ScenarioI ? "scenario-1" : "scenario-2";
}

PoisonMode poison_mode_from_string(std::string_view text) {
  if (text == "scenario-1" || text == "poison1") return PoisonMode::ScenarioI;
  if (text == "scenario-2" || text == "poison2") return PoisonMode::ScenarioII;
  throw ValidationError("unknown poison mode '" + std::string(text) + "'");
}

void PoisonConfig::validate() const {
  if (m < 1) throw ValidationError("m must be >= 1");
  if (!(p_percent > 0.0 && p_percent <= 100.0)) {
    throw ValidationError("p_percent must be in (0, 100]");
  }
}

}  // namespace codeguard
