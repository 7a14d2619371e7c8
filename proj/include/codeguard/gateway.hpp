#pragma once

// Text-completion backends (live HTTP and deterministic replay) and the
// prompts sent through them.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codeguard/model.hpp"

namespace codeguard {

struct CompletionRequest {
  std::string system_text;
  std::string user_text;
  double temperature = 0.0;
  int max_new_tokens = 4096;

  void validate() const;
};

// Stable 16-hex-digit digest of (system_text, user_text). Sampling
// parameters are deliberately not part of it.
std::string fingerprint(const CompletionRequest& request);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Validates the request, then forwards to the backend.
std::string complete(const CompletionRequest& request, CompletionBackend& backend);

// Canned responses keyed by request fingerprint. Persisted as JSON lines:
// {"fingerprint": "...", "response": "...", "note": "..."}.
class ReplayScript {
 public:
  ReplayScript() = default;
  explicit ReplayScript(bool strict) : strict_(strict) {}

  static ReplayScript load(const std::filesystem::path& path, bool strict = true);
  void save(const std::filesystem::path& path) const;

  void add(std::string fingerprint, std::string response, std::string note = {});
  void add(const CompletionRequest& request, std::string response, std::string note = {});
  std::optional<std::string> find(const std::string& fingerprint) const;

  bool strict() const noexcept { return strict_; }
  void set_strict(bool strict) noexcept { strict_ = strict; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  struct Canned {
    std::string response;
    std::string note;
  };
  std::map<std::string, Canned> entries_;
  bool strict_ = true;
};

class ReplayBackend final : public CompletionBackend {
 public:
  explicit ReplayBackend(ReplayScript script) : script_(std::move(script)) {}

  // Strict mode throws ReplayMissError on a miss; lenient mode returns "" and
  // records the fingerprint.
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "replay"; }

  std::vector<std::string> misses() const;
  const ReplayScript& script() const noexcept { return script_; }

 private:
  ReplayScript script_;
  mutable std::mutex mutex_;
  std::vector<std::string> misses_;
};

// Connection settings shared by the chat and embedding clients.
struct HttpSettings {
  std::string url;  // full endpoint, e.g. http://host:8000/v1/chat/completions
  std::string api_key;
  std::string model;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::seconds timeout{300};
};

// Reads RACG_LLM_URL / RACG_LLM_KEY (and optional RACG_LLM_MODEL).
// Throws ConfigError when the URL is missing.
HttpSettings llm_settings_from_env();

// OpenAI-style chat-completion client.
class HttpChatBackend final : public CompletionBackend {
 public:
  explicit HttpChatBackend(HttpSettings settings);
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "http:" + settings_.model; }

 private:
  HttpSettings settings_;
};

// Forwards to another backend and remembers every exchange, so a live run
// can be turned into a replay script.
class RecordingBackend final : public CompletionBackend {
 public:
  explicit RecordingBackend(CompletionBackend& inner) : inner_(inner) {}
  std::string complete(const CompletionRequest& request) override;
  std::string name() const override { return "record:" + inner_.name(); }
  ReplayScript script() const;

 private:
  CompletionBackend& inner_;
  mutable std::mutex mutex_;
  ReplayScript recorded_;
};

// Prompt renderers. Templates live in prompts.hpp.
CompletionRequest render_extraction_prompt(const VulnerabilityRecord& record,
                                           std::string_view diff_text);
CompletionRequest render_decomposition_prompt(std::string_view query);
CompletionRequest render_generation_request(std::string_view prompt,
                                            double temperature = 0.0,
                                            int max_new_tokens = 4096);

// Numbered/bulleted list -> ordered sub-tasks. Throws DecompositionError when
// nothing parsable remains.
std::vector<SubTask> parse_decomposition(std::string_view response);

}  // namespace codeguard
