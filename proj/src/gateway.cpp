#include "codeguard/gateway.hpp"

#include <cstdlib>
#include <regex>

#include "codeguard/errors.hpp"
#include "codeguard/hash.hpp"
#include "codeguard/prompts.hpp"
#include "http_client.hpp"
#include "jsonl.hpp"

namespace codeguard {

using detail::json;

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

void CompletionRequest::validate() const {
  if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
  if (max_new_tokens < 1) throw ValidationError("max_new_tokens must be >= 1");
}

std::string fingerprint(const CompletionRequest& request) {
  // Length-prefixing keeps ("ab","c") and ("a","bc") apart.
  std::string material = std::to_string(request.system_text.size());
  material += ':';
  material += request.system_text;
  material += request.user_text;
  return to_hex(fnv1a64(material));
}

std::string complete(const CompletionRequest& request, CompletionBackend& backend) {
  request.validate();
  return backend.complete(request);
}

// ---------------------------------------------------------------------------
// Replay

ReplayScript ReplayScript::load(const std::filesystem::path& path, bool strict) {
  ReplayScript script(strict);
  detail::for_each_json_line(path, [&](const json& line, std::size_t) {
    script.add(detail::get_string(line, "fingerprint"), detail::get_string(line, "response"),
               detail::get_string_or(line, "note", ""));
  });
  return script;
}

void ReplayScript::save(const std::filesystem::path& path) const {
  std::vector<json> lines;
  lines.reserve(entries_.size());
  for (const auto& [fp, canned] : entries_) {
    json line{{"fingerprint", fp}, {"response", canned.response}};
    if (!canned.note.empty()) line["note"] = canned.note;
    lines.push_back(std::move(line));
  }
  detail::write_json_lines(path, lines);
}

void ReplayScript::add(std::string fp, std::string response, std::string note) {
  entries_[std::move(fp)] = Canned{std::move(response), std::move(note)};
}

void ReplayScript::add(const CompletionRequest& request, std::string response, std::string note) {
  add(fingerprint(request), std::move(response), std::move(note));
}

std::optional<std::string> ReplayScript::find(const std::string& fp) const {
  auto it = entries_.find(fp);
  if (it == entries_.end()) return std::nullopt;
  return it->second.response;
}

std::string ReplayBackend::complete(const CompletionRequest& request) {
  const std::string fp = fingerprint(request);
  if (auto hit = script_.find(fp)) return *hit;
  if (script_.strict()) throw ReplayMissError(fp);
  std::lock_guard lock(mutex_);
  misses_.push_back(fp);
  return {};
}

std::vector<std::string> ReplayBackend::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

std::string RecordingBackend::complete(const CompletionRequest& request) {
  std::string response = inner_.complete(request);
  std::lock_guard lock(mutex_);
  recorded_.add(request, response);
  return response;
}

ReplayScript RecordingBackend::script() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

// ---------------------------------------------------------------------------
// Live HTTP

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value != nullptr && *value != '\0' ? std::string(value) : std::move(fallback);
}

}  // namespace

HttpSettings llm_settings_from_env() {
  HttpSettings settings;
  settings.url = env_or("RACG_LLM_URL", "");
  if (settings.url.empty()) throw ConfigError("RACG_LLM_URL is not set");
  settings.api_key = env_or("RACG_LLM_KEY", "");
  settings.model = env_or("RACG_LLM_MODEL", "deepseek-chat");
  return settings;
}

HttpChatBackend::HttpChatBackend(HttpSettings settings) : settings_(std::move(settings)) {
  if (settings_.url.empty()) throw ConfigError("chat backend needs an endpoint URL");
}

std::string HttpChatBackend::complete(const CompletionRequest& request) {
  json messages = json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  const json body{{"model", settings_.model},
                  {"messages", std::move(messages)},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_new_tokens}};

  const std::string raw = detail::post_json(settings_, body.dump());
  try {
    const json reply = json::parse(raw);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed chat-completion response: ") + e.what(), 1);
  }
}

// ---------------------------------------------------------------------------
// Prompt rendering

CompletionRequest render_extraction_prompt(const VulnerabilityRecord& record,
                                           std::string_view diff_text) {
  CompletionRequest request;
  request.system_text = std::string(prompts::kExtraction.system);
  request.user_text = prompts::render(prompts::kExtraction.user,
                                      {{"CVE_DESCRIPTION", record.cve_description},
                                       {"CWE_ID", record.cwe_id},
                                       {"DIFF", std::string(diff_text)}});
  return request;
}

CompletionRequest render_decomposition_prompt(std::string_view query) {
  if (query.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ValidationError("decomposition query is empty");
  }
  CompletionRequest request;
  request.system_text = std::string(prompts::kDecomposition.system);
  request.user_text =
      prompts::render(prompts::kDecomposition.user, {{"QUERY", std::string(query)}});
  return request;
}

CompletionRequest render_generation_request(std::string_view prompt, double temperature,
                                            int max_new_tokens) {
  CompletionRequest request;
  request.system_text = std::string(prompts::kGeneration.system);
  request.user_text = prompts::render(prompts::kGeneration.user, {{"PROMPT", std::string(prompt)}});
  request.temperature = temperature;
  request.max_new_tokens = max_new_tokens;
  request.validate();
  return request;
}

std::vector<SubTask> parse_decomposition(std::string_view response) {
  static const std::regex kMarker(R"(^(?:\d+[.)]\s*|[-*](?:\s+|$)))");
  std::vector<SubTask> out;
  std::size_t pos = 0;
  while (pos <= response.size()) {
    auto end = response.find('\n', pos);
    if (end == std::string_view::npos) end = response.size();
    std::string line(response.substr(pos, end - pos));
    pos = end + 1;

    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    line = std::regex_replace(line, kMarker, "", std::regex_constants::format_first_only);
    first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line.erase(0, first);
    out.push_back(SubTask{static_cast<int>(out.size()), std::move(line)});
  }
  if (out.empty()) throw DecompositionError("no sub-tasks in decomposition response");
  return out;
}

}  // namespace codeguard
