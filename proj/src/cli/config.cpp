#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdlib>

#include "codeguard/errors.hpp"

namespace codeguard::cli {

namespace pt = boost::property_tree;

void RunConfig::validate() const {
  generation.hardener.validate();
  poison.validate();
  if (generation.n_examples < 0) throw ConfigError("n_examples must be >= 0");
  if (generation.max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
  if (generation.context_window <= static_cast<std::size_t>(generation.max_new_tokens)) {
    throw ConfigError("context_window must exceed max_new_tokens");
  }
  if (backend == BackendMode::Replay && replay_script.empty()) {
    throw ConfigError("replay mode requires a script path");
  }
  if (backend == BackendMode::Live) {
    const char* url = std::getenv("RACG_LLM_URL");
    if (url == nullptr || *url == '\0') {
      throw ConfigError("live mode requires RACG_LLM_URL (or use --replay <script>)");
    }
  }
}

namespace {

template <typename T>
void read(const pt::ptree& tree, const char* key, T& target) {
  if (auto value = tree.get_optional<T>(key)) target = *value;
}

void read_path(const pt::ptree& tree, const char* key, const std::filesystem::path& dir,
               std::filesystem::path& target) {
  if (auto value = tree.get_optional<std::string>(key)) {
    std::filesystem::path p(*value);
    target = p.empty() || p.is_absolute() ? p : dir / p;
  }
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path, RunConfig config) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  const auto dir = path.parent_path();
  try {
    if (auto paths = tree.get_child_optional("paths")) {
      read_path(*paths, "vulnerabilities", dir, config.vulnerabilities);
      read_path(*paths, "base", dir, config.base);
      read_path(*paths, "functional_corpus", dir, config.functional_corpus);
      read_path(*paths, "vulnerable_corpus", dir, config.vulnerable_corpus);
      read_path(*paths, "batch", dir, config.batch);
      read_path(*paths, "rules", dir, config.rules);
      read_path(*paths, "output", dir, config.output);
    }
    if (auto hardener = tree.get_child_optional("hardener")) {
      read(*hardener, "k_prime", config.generation.hardener.k_prime);
      read(*hardener, "k", config.generation.hardener.k);
    }
    if (auto weights = tree.get_child_optional("weights")) {
      auto& table = config.generation.hardener.weight_table;
      for (const auto& [key, node] : *weights) {
        const auto value = node.get_value<double>();
        if (key == "default") {
          table.set_default(value);
        } else {
          table.set(key, value);
        }
      }
    }
    if (auto poison = tree.get_child_optional("poison")) {
      if (auto mode = poison->get_optional<std::string>("mode")) {
        config.poison.mode = poison_mode_from_string(*mode);
      }
      read(*poison, "m", config.poison.m);
      read(*poison, "p_percent", config.poison.p_percent);
      read(*poison, "seed", config.poison.cluster_seed);
    }
    if (auto gen = tree.get_child_optional("generation")) {
      read(*gen, "n_examples", config.generation.n_examples);
      read(*gen, "temperature", config.generation.temperature);
      read(*gen, "max_new_tokens", config.generation.max_new_tokens);
      read(*gen, "context_window", config.generation.context_window);
      read(*gen, "decompose", config.generation.decompose);
      read(*gen, "language", config.language_filter);
      read(*gen, "seed", config.seed);
    }
    if (auto backend = tree.get_child_optional("backend")) {
      if (auto mode = backend->get_optional<std::string>("mode")) {
        if (*mode == "live") {
          config.backend = BackendMode::Live;
        } else if (*mode == "replay") {
          config.backend = BackendMode::Replay;
        } else {
          throw ConfigError("backend.mode must be live or replay, got " + *mode);
        }
      }
      read_path(*backend, "replay_script", dir, config.replay_script);
      if (auto embedder = backend->get_optional<std::string>("embedder")) {
        if (*embedder == "hash") {
          config.embedder = EmbedderKind::Hash;
        } else if (*embedder == "http") {
          config.embedder = EmbedderKind::Http;
        } else {
          throw ConfigError("backend.embedder must be hash or http, got " + *embedder);
        }
      }
    }
  } catch (const pt::ptree_bad_data& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config;
}

}  // namespace codeguard::cli
