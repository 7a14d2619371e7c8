#pragma once

// Security and similarity evaluation of generated code.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codeguard/model.hpp"
#include "codeguard/pipeline.hpp"

namespace codeguard {

struct DetectorRule {
  std::string rule_id;
  std::string cwe_id;
  // Lowercase language tag, a comma-separated list of tags, or "*".
  std::string language;
  std::string pattern;  // ECMAScript regular expression
  std::string description;
  // Matched against the whole source instead of line by line; a finding is
  // reported on the line where the match starts.
  bool whole_file = false;

  bool applies_to(std::string_view language_tag) const;

  bool operator==(const DetectorRule& other) const {
    return rule_id == other.rule_id && cwe_id == other.cwe_id && language == other.language &&
           pattern == other.pattern && description == other.description &&
           whole_file == other.whole_file;
  }
};

class RuleSet {
 public:
  RuleSet() = default;

  // Rules compiled into the library from config/default_rules.jsonl.
  static RuleSet bundled();
  // One JSON rule object per line: rule_id, cwe, language, pattern,
  // description.
  static RuleSet load(const std::filesystem::path& path);
  static RuleSet parse(std::string_view jsonl_text, const std::string& origin = "<memory>");
  void save(const std::filesystem::path& path) const;

  // Compiles the pattern; throws ValidationError on a bad regex, CWE id or a
  // duplicate rule id.
  void add(DetectorRule rule);

  std::size_t size() const noexcept { return rules_.size(); }
  const DetectorRule& rule(std::size_t i) const { return rules_[i].rule; }
  const std::regex& compiled(std::size_t i) const { return *rules_[i].regex; }

 private:
  struct Compiled {
    DetectorRule rule;
    std::shared_ptr<const std::regex> regex;
  };
  std::vector<Compiled> rules_;
};

// Applies each rule matching `language` line by line; one finding per match.
// No findings means the code is judged secure.
std::vector<Finding> detect(std::string_view code, std::string_view language,
                            const RuleSet& rules);

// Runs an external detector. `argv` is a command template whose elements may
// contain {file} and {language}; the command must print
// "rule_id<TAB>cwe<TAB>line" per finding. Nonzero exit or unparsable output
// throws EvaluationError.
struct ExternalDetector {
  std::vector<std::string> argv;

  // Splits a command line on whitespace (no quoting rules).
  static ExternalDetector from_command_line(std::string_view command);
};

std::vector<Finding> detect_external(std::string_view code, std::string_view language,
                                     const ExternalDetector& detector);

// 100 * (cases without findings) / cases. Throws EvaluationError on no cases.
double security_rate(const std::vector<std::pair<std::string, std::vector<Finding>>>& per_case);

// Token-level BLEU-4 in [0, 100] with brevity penalty. A zero n-gram match
// count is smoothed to 1 / (candidate n-grams + 1). An order the candidate
// is too short for scores 1 when the reference is too short for it as well,
// else 1 / (reference n-grams + 1). This is a stand-in for
// CodeBLEU without the syntax and data-flow terms. Not symmetric. Throws
// ValidationError when the reference has no tokens.
double similarity(std::string_view candidate, std::string_view reference);

struct SecuredRatio {
  double percent = 0.0;
  bool defined = true;  // false when nothing was insecure before
};

// Share of cases insecure before that are secure after.
SecuredRatio secured_ratio(const std::vector<std::pair<std::string, bool>>& before,
                           const std::vector<std::pair<std::string, bool>>& after);

struct ReportOptions {
  const RuleSet* rules = nullptr;
  std::optional<ExternalDetector> external;
  const std::map<std::string, std::string>* references = nullptr;  // case id -> code
};

// Detects and scores each record. Records whose generation failed, and cases
// the external detector could not score, are counted as unscored and left
// out of the security rate.
EvalReport build_report(const std::vector<GenerationRecord>& records,
                        const ReportOptions& options);

void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

}  // namespace codeguard
