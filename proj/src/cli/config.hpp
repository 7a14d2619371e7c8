#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "codeguard/model.hpp"
#include "codeguard/pipeline.hpp"

namespace codeguard::cli {

enum class BackendMode { Live, Replay };
enum class EmbedderKind { Hash, Http };

struct RunConfig {
  // Inputs and outputs. Relative paths from a config file resolve against
  // the file's directory.
  std::filesystem::path vulnerabilities;
  std::filesystem::path base;
  std::filesystem::path functional_corpus;
  std::filesystem::path vulnerable_corpus;
  std::filesystem::path batch;
  std::filesystem::path rules;  // empty: bundled rules
  std::filesystem::path output;

  GenerationSettings generation;
  PoisonConfig poison;
  std::uint64_t seed = 0;

  BackendMode backend = BackendMode::Live;
  std::filesystem::path replay_script;
  EmbedderKind embedder = EmbedderKind::Hash;
  std::string language_filter;  // empty: every language

  // Replay needs a script; live mode needs RACG_LLM_URL.
  void validate() const;
};

// Reads an INI-style file with [paths], [hardener], [weights], [poison],
// [generation] and [backend] sections over `defaults`. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path, RunConfig defaults = {});

}  // namespace codeguard::cli
