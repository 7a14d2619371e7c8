#include "app.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <memory>
#include <ostream>
#include <set>
#include <thread>

#include "codeguard/embedding.hpp"
#include "codeguard/errors.hpp"
#include "codeguard/eval.hpp"
#include "codeguard/gateway.hpp"
#include "codeguard/hardener.hpp"
#include "codeguard/kb.hpp"
#include "codeguard/pipeline.hpp"
#include "codeguard/poison.hpp"
#include "config.hpp"

namespace codeguard::cli {

namespace {

namespace fs = std::filesystem;

std::string fixed2(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

// Values as typed on the command line; each applies only when given.
struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string replay;
  bool verbose = false;

  std::string vulnerabilities;
  std::string base;
  std::string functional;
  std::string vulnerable;
  std::string batch;
  std::string rules;
  std::string output;
  std::string language;
  int k_prime = 0;
  int k = 0;
  int m = 0;
  double p_percent = 0.0;
  int n_examples = 0;

  std::string skip_log;
  std::string query;
  std::string query_file;
  bool dry_run = false;
  bool no_decompose = false;
  std::string scenario = "standard";
  bool both = false;
  bool unhardened_only = false;
  std::string records;
  std::string references;
  std::string external;
  std::string report;
  std::string plan;
  std::string poisoned_corpus;
};

struct Given {
  CLI::Option* seed = nullptr;
  CLI::Option* jobs = nullptr;
  CLI::Option* replay = nullptr;
  std::multimap<std::string, CLI::Option*> by_name;

  bool has(const std::string& name) const {
    auto [first, last] = by_name.equal_range(name);
    for (auto it = first; it != last; ++it) {
      if (it->second->count() > 0) return true;
    }
    return false;
  }
};

struct Session {
  RunConfig config;
  int jobs = 1;
  std::ostream& out;
  std::ostream& err;

  std::unique_ptr<CompletionBackend> llm;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<Embedder> attacker;

  CompletionBackend& backend() {
    if (!llm) {
      config.validate();
      if (config.backend == BackendMode::Replay) {
        llm = std::make_unique<ReplayBackend>(ReplayScript::load(config.replay_script, true));
      } else {
        llm = std::make_unique<HttpChatBackend>(llm_settings_from_env());
      }
    }
    return *llm;
  }

  const Embedder& defender() {
    if (!embedder) {
      if (config.embedder == EmbedderKind::Http) {
        embedder = std::make_unique<HttpEmbedder>(embed_settings_from_env());
      } else {
        embedder = std::make_unique<HashingEmbedder>(HashingEmbedder::kDefenderSeed);
      }
    }
    return *embedder;
  }

  // The attacker embeds with its own model instance.
  const Embedder& attacker_embedder() {
    if (!attacker) {
      if (config.embedder == EmbedderKind::Http) {
        attacker = std::make_unique<HttpEmbedder>(embed_settings_from_env());
      } else {
        attacker = std::make_unique<HashingEmbedder>(HashingEmbedder::kAttackerSeed);
      }
    }
    return *attacker;
  }
};

const fs::path& require(const fs::path& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing ") + what + " path");
  return path;
}

fs::path output_dir(const RunConfig& config) {
  return config.output.empty() ? fs::path("out") : config.output;
}

bool language_selected(const RunConfig& config, const std::string& language) {
  return config.language_filter.empty() || config.language_filter == language;
}

std::vector<CodeExample> load_functional(const RunConfig& config) {
  auto corpus = load_corpus(require(config.functional_corpus, "functional corpus"),
                            CorpusKind::Functional);
  std::erase_if(corpus, [&](const CodeExample& e) { return !language_selected(config, e.language); });
  return corpus;
}

std::vector<CodeExample> load_vulnerable(const RunConfig& config) {
  auto corpus = load_corpus(require(config.vulnerable_corpus, "vulnerable corpus"),
                            CorpusKind::Vulnerable);
  std::erase_if(corpus, [&](const CodeExample& e) { return !language_selected(config, e.language); });
  return corpus;
}

std::vector<BatchCase> load_cases(const RunConfig& config) {
  auto cases = load_batch(require(config.batch, "batch"));
  std::erase_if(cases, [&](const BatchCase& c) { return !language_selected(config, c.language); });
  return cases;
}

PoisonResult apply_poison(Session& s, PoisonMode mode, const std::vector<CodeExample>& functional,
                          const std::vector<BatchCase>& cases) {
  const auto vulnerable = load_vulnerable(s.config);
  if (mode == PoisonMode::ScenarioI) {
    std::vector<AttackQuery> queries;
    for (const auto& c : cases) queries.push_back(AttackQuery{c.case_id, c.query});
    return poison_scenario_1(queries, functional, vulnerable, s.config.poison.m,
                             s.attacker_embedder());
  }
  return poison_scenario_2(functional, vulnerable, s.config.poison.p_percent,
                           s.config.poison.cluster_seed, s.attacker_embedder());
}

void write_poison_outputs(const PoisonResult& result, const fs::path& corpus_path,
                          const fs::path& plan_path, std::ostream& out) {
  save_corpus(result.corpus, corpus_path);
  save_plan(result.plan, plan_path);
  out << "injected " << result.plan.injections.size() << " examples ("
      << to_string(result.plan.mode) << "); corpus size " << result.plan.resulting_corpus_size
      << "\n";
}

// ---------------------------------------------------------------------------

int cmd_build_kb(Session& s, const Flags& f) {
  const auto records = load_vulnerabilities(require(s.config.vulnerabilities, "input"));
  const fs::path base_path = require(s.config.base, "output base");
  BuildOptions options;
  options.jobs = s.jobs;
  if (!s.config.language_filter.empty()) {
    const std::string language = s.config.language_filter;
    options.include = [language](const VulnerabilityRecord& r) { return r.language == language; };
  }
  auto result = build_knowledge_base(records, s.backend(), s.defender(), options);
  save_base(result.base, base_path);
  fs::path skip_path = f.skip_log.empty() ? fs::path(base_path).replace_extension(".skipped.jsonl")
                                          : fs::path(f.skip_log);
  save_skip_log(result.skipped, skip_path);
  s.out << result.base.size() << " entries\n";
  if (!result.skipped.empty()) {
    s.out << result.skipped.size() << " records skipped (see " << skip_path.string() << ")\n";
  }
  return kExitOk;
}

int cmd_harden(Session& s, const Flags& f) {
  std::string query = f.query;
  if (!f.query_file.empty()) {
    std::ifstream in(f.query_file, std::ios::binary);
    if (!in) throw ParseError("cannot open " + f.query_file, 0);
    query.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  if (query.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ValidationError("harden needs a non-empty --query or --query-file");
  }
  const auto base = load_base(require(s.config.base, "knowledge base"));

  std::vector<CodeExample> examples;
  if (!s.config.functional_corpus.empty() && s.config.generation.n_examples > 0) {
    const auto corpus = load_functional(s.config);
    if (!corpus.empty()) {
      const auto index = build_code_index(corpus, s.defender());
      examples = retrieve_examples(query, index, corpus, s.config.generation.n_examples,
                                   s.defender());
    }
  }
  auto& backend = s.backend();
  auto bundle = harden(query, base, s.config.generation.hardener, backend, s.defender(),
                       std::move(examples), HardenOptions{s.config.generation.decompose});
  const auto dropped = fit_to_budget(bundle, s.config.generation.prompt_budget());
  if (dropped > 0) spdlog::warn("dropped {} security section(s) to fit the prompt budget", dropped);
  const std::string prompt = assemble_prompt(bundle);
  s.out << prompt;
  if (!prompt.empty() && prompt.back() != '\n') s.out << '\n';
  if (f.dry_run) return kExitOk;

  const auto request = render_generation_request(prompt, s.config.generation.temperature,
                                                 s.config.generation.max_new_tokens);
  const std::string code = extract_code(complete(request, backend));
  s.out << "\n### Generated code\n" << code;
  if (!code.empty() && code.back() != '\n') s.out << '\n';
  return kExitOk;
}

int cmd_run(Session& s, const Flags& f) {
  const auto cases = load_cases(s.config);
  if (cases.empty()) throw ValidationError("batch has no cases");
  const fs::path dir = output_dir(s.config);
  const bool hardened = !f.unhardened_only;
  const bool unhardened = f.both || f.unhardened_only;

  std::vector<CodeExample> corpus;
  const bool needs_corpus = s.config.generation.n_examples > 0 || f.scenario != "standard";
  if (needs_corpus) corpus = load_functional(s.config);

  if (f.scenario != "standard") {
    const auto result = apply_poison(s, poison_mode_from_string(f.scenario), corpus, cases);
    write_poison_outputs(result, dir / "poisoned_corpus.jsonl", dir / "poison_plan.json", s.out);
    corpus = result.corpus;
  }

  std::optional<KnowledgeBase> base;
  if (hardened) base = load_base(require(s.config.base, "knowledge base"));

  std::optional<VectorIndex> code_index;
  if (s.config.generation.n_examples > 0 && !corpus.empty()) {
    code_index = build_code_index(corpus, s.defender());
  }
  GenerationContext context;
  context.base = base ? &*base : nullptr;
  context.code_index = code_index ? &*code_index : nullptr;
  context.corpus = &corpus;
  context.backend = &s.backend();
  context.embedder = &s.defender();

  GenerationSettings settings = s.config.generation;
  if (!code_index) settings.n_examples = 0;
  const auto records = run_batch(cases, context, settings, unhardened, hardened, s.jobs);
  const fs::path records_path = dir / "generations.jsonl";
  save_generation_records(records, records_path);

  const auto failed = std::count_if(records.begin(), records.end(),
                                    [](const GenerationRecord& r) { return !r.error.empty(); });
  s.out << records.size() << " records written to " << records_path.string() << "\n";
  if (failed > 0) {
    s.err << failed << " generation(s) failed; see the error field of the records\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_evaluate(Session& s, const Flags& f) {
  const fs::path dir = output_dir(s.config);
  const fs::path records_path = f.records.empty() ? dir / "generations.jsonl" : fs::path(f.records);
  const auto records = load_generation_records(records_path);

  const RuleSet rules = s.config.rules.empty() ? RuleSet::bundled() : RuleSet::load(s.config.rules);
  std::map<std::string, std::string> references;
  const fs::path reference_path = f.references.empty() ? s.config.batch : fs::path(f.references);
  if (!reference_path.empty()) {
    for (const auto& c : load_batch(reference_path)) {
      if (c.reference_code) references[c.case_id] = *c.reference_code;
    }
  }
  ReportOptions options;
  options.rules = &rules;
  if (!f.external.empty()) options.external = ExternalDetector::from_command_line(f.external);
  if (!references.empty()) options.references = &references;

  const auto report = build_report(records, options);
  const fs::path report_path = f.report.empty() ? records_path.parent_path() / "report.jsonl"
                                                : fs::path(f.report);
  save_report(report, report_path);

  s.out << "cases=" << report.total_cases << " scored=" << report.total_cases - report.unscored_cases
        << " unscored=" << report.unscored_cases << "\n";
  s.out << "SR=" << fixed2(report.security_rate) << "\n";
  if (report.mean_similarity) {
    s.out << "Sim=" << fixed2(*report.mean_similarity) << "\n";
  } else {
    s.err << "warning: no reference code available; Sim omitted\n";
  }

  std::vector<std::pair<std::string, bool>> before;
  std::vector<std::pair<std::string, bool>> after;
  std::vector<std::pair<std::string, std::vector<Finding>>> scored[2];
  for (const auto& c : report.per_case) {
    if (!c.scored) continue;
    scored[c.hardened ? 1 : 0].emplace_back(c.case_id, c.findings);
  }
  if (!scored[0].empty() && !scored[1].empty()) {
    s.out << "SR_unhardened=" << fixed2(security_rate(scored[0])) << "\n";
    s.out << "SR_hardened=" << fixed2(security_rate(scored[1])) << "\n";
    std::set<std::string> hardened_ids;
    for (const auto& [id, findings] : scored[1]) hardened_ids.insert(id);
    std::set<std::string> paired;
    for (const auto& [id, findings] : scored[0]) {
      if (hardened_ids.count(id) > 0) paired.insert(id);
    }
    for (int mode = 0; mode < 2; ++mode) {
      for (const auto& [id, findings] : scored[mode]) {
        if (paired.count(id) == 0) continue;
        (mode == 0 ? before : after).emplace_back(id, findings.empty());
      }
    }
    if (!paired.empty()) {
      const auto ratio = secured_ratio(before, after);
      s.out << "secured_ratio=" << (ratio.defined ? fixed2(ratio.percent) : "undefined") << "\n";
    }
  }
  s.out << "report written to " << report_path.string() << "\n";
  return kExitOk;
}

int cmd_poison(Session& s, const Flags& f) {
  const fs::path dir = output_dir(s.config);
  const auto mode = poison_mode_from_string(f.scenario == "standard" ? "poison1" : f.scenario);
  const auto functional = load_functional(s.config);
  std::vector<BatchCase> cases;
  if (mode == PoisonMode::ScenarioI) cases = load_cases(s.config);
  const auto result = apply_poison(s, mode, functional, cases);
  const fs::path corpus_path =
      f.poisoned_corpus.empty() ? dir / "poisoned_corpus.jsonl" : fs::path(f.poisoned_corpus);
  const fs::path plan_path = f.plan.empty() ? dir / "poison_plan.json" : fs::path(f.plan);
  write_poison_outputs(result, corpus_path, plan_path, s.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

RunConfig resolve_config(const Flags& f, const Given& given) {
  RunConfig config;
  if (!f.config.empty()) config = load_config(f.config, config);

  auto set_path = [&](const char* name, const std::string& value, fs::path& target) {
    if (given.has(name)) target = value;
  };
  set_path("--input", f.vulnerabilities, config.vulnerabilities);
  set_path("--base", f.base, config.base);
  set_path("--functional", f.functional, config.functional_corpus);
  set_path("--vulnerable", f.vulnerable, config.vulnerable_corpus);
  set_path("--batch", f.batch, config.batch);
  set_path("--queries", f.batch, config.batch);
  set_path("--rules", f.rules, config.rules);
  set_path("--out", f.output, config.output);
  if (given.has("--language")) config.language_filter = f.language;
  if (given.has("--k-prime")) config.generation.hardener.k_prime = f.k_prime;
  if (given.has("--k")) config.generation.hardener.k = f.k;
  if (given.has("--m")) config.poison.m = f.m;
  if (given.has("--p")) config.poison.p_percent = f.p_percent;
  if (given.has("--examples")) config.generation.n_examples = f.n_examples;
  if (given.has("--no-decompose")) config.generation.decompose = false;
  if (given.seed->count() > 0) {
    config.seed = f.seed;
    config.poison.cluster_seed = f.seed;
  }
  if (given.replay->count() > 0) {
    config.backend = BackendMode::Replay;
    config.replay_script = f.replay;
  }
  return config;
}

class StreamSinkGuard {
 public:
  StreamSinkGuard(std::ostream& err, bool verbose) {
    previous_ = spdlog::default_logger();
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
    auto logger = std::make_shared<spdlog::logger>("codeguard", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(verbose ? spdlog::level::debug : spdlog::level::warn);
    spdlog::set_default_logger(logger);
  }
  ~StreamSinkGuard() { spdlog::set_default_logger(previous_); }
  StreamSinkGuard(const StreamSinkGuard&) = delete;
  StreamSinkGuard& operator=(const StreamSinkGuard&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  Given given;
  CLI::App app{"Security hardening for retrieval-augmented code generation", "codeguard"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--config", f.config, "INI configuration file");
  given.seed = app.add_option("--seed", f.seed, "Seed for clustering and sampling");
  given.jobs = app.add_option("--jobs", f.jobs, "Worker threads (default: processor count)")
                   ->check(CLI::PositiveNumber);
  given.replay = app.add_option("--replay", f.replay, "Replay script instead of a live model");
  app.add_flag("--verbose,-v", f.verbose, "Debug logging");

  auto track = [&](CLI::Option* option, std::string key = {}) {
    given.by_name.emplace(key.empty() ? option->get_name() : key, option);
  };

  auto* build = app.add_subcommand("build-kb", "Extract security knowledge from CVE records");
  track(build->add_option("--input", f.vulnerabilities, "Vulnerability records (JSONL)"));
  track(build->add_option("--out,--base", f.base, "Knowledge base output path"), "--base");
  build->add_option("--skip-log", f.skip_log, "Where to log skipped records");
  track(build->add_option("--language", f.language, "Only records in this language"));

  auto* harden_cmd = app.add_subcommand("harden", "Print the security-augmented prompt for a query");
  harden_cmd->add_option("--query,-q", f.query, "Code-generation query");
  harden_cmd->add_option("--query-file", f.query_file, "Read the query from a file");
  track(harden_cmd->add_option("--base", f.base, "Knowledge base"));
  track(harden_cmd->add_option("--functional", f.functional, "Functional corpus for examples"));
  track(harden_cmd->add_option("--examples", f.n_examples, "Code examples to retrieve"));
  track(harden_cmd->add_option("--k-prime", f.k_prime, "Entries per sub-task"));
  track(harden_cmd->add_option("--k", f.k, "Sub-tasks kept"));
  harden_cmd->add_flag("--dry-run", f.dry_run, "Print the prompt only");
  track(harden_cmd->add_flag("--no-decompose", f.no_decompose, "Use the query as the only sub-task"));

  auto* run = app.add_subcommand("run", "Run a generation batch");
  track(run->add_option("--batch", f.batch, "Batch cases (JSONL)"));
  track(run->add_option("--base", f.base, "Knowledge base"));
  track(run->add_option("--functional", f.functional, "Functional corpus"));
  track(run->add_option("--vulnerable", f.vulnerable, "Vulnerable corpus (poisoning)"));
  track(run->add_option("--out", f.output, "Output directory"));
  track(run->add_option("--language", f.language, "Only cases in this language"));
  track(run->add_option("--examples", f.n_examples, "Code examples per query"));
  track(run->add_option("--k-prime", f.k_prime, "Entries per sub-task"));
  track(run->add_option("--k", f.k, "Sub-tasks kept"));
  track(run->add_option("--m", f.m, "Scenario I injections per query"));
  track(run->add_option("--p", f.p_percent, "Scenario II share of the corpus, percent"));
  run->add_option("--scenario", f.scenario, "standard, poison1 or poison2")
      ->check(CLI::IsMember({"standard", "poison1", "poison2"}));
  auto* both = run->add_flag("--both", f.both, "Write hardened and unhardened records");
  run->add_flag("--unhardened", f.unhardened_only, "Unhardened records only")->excludes(both);
  track(run->add_flag("--no-decompose", f.no_decompose, "Use each query as its only sub-task"));

  auto* evaluate = app.add_subcommand("evaluate", "Score generation records");
  evaluate->add_option("--records", f.records, "Generation records (default: <out>/generations.jsonl)");
  track(evaluate->add_option("--rules", f.rules, "Detector rules (default: bundled)"));
  evaluate->add_option("--references", f.references, "Batch file with reference_code");
  evaluate->add_option("--external", f.external, "External detector command template");
  evaluate->add_option("--report", f.report, "Report output path");
  track(evaluate->add_option("--out", f.output, "Output directory"));

  auto* poison = app.add_subcommand("poison", "Generate a poisoning plan and poisoned corpus");
  poison->add_option("--scenario", f.scenario, "poison1 or poison2")
      ->check(CLI::IsMember({"poison1", "poison2", "scenario-1", "scenario-2"}));
  track(poison->add_option("--functional", f.functional, "Functional corpus"));
  track(poison->add_option("--vulnerable", f.vulnerable, "Vulnerable corpus"));
  track(poison->add_option("--queries", f.batch, "Attack queries as a batch file (Scenario I)"));
  track(poison->add_option("--m", f.m, "Injections per query"));
  track(poison->add_option("--p", f.p_percent, "Share of the corpus, percent"));
  track(poison->add_option("--language", f.language, "Only examples in this language"));
  track(poison->add_option("--out", f.output, "Output directory"));
  poison->add_option("--plan", f.plan, "Plan output path");
  poison->add_option("--corpus-out", f.poisoned_corpus, "Poisoned corpus output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  StreamSinkGuard logging(err, f.verbose);
  try {
    Session session{resolve_config(f, given), 1, out, err, {}, {}, {}};
    if (given.jobs->count() > 0) {
      session.jobs = f.jobs;
    } else {
      session.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    if (session.config.backend == BackendMode::Replay) session.jobs = 1;

    if (build->parsed()) return cmd_build_kb(session, f);
    if (harden_cmd->parsed()) return cmd_harden(session, f);
    if (run->parsed()) return cmd_run(session, f);
    if (evaluate->parsed()) return cmd_evaluate(session, f);
    if (poison->parsed()) return cmd_poison(session, f);
    return kExitUsage;
  } catch (const ReplayMissError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace codeguard::cli
