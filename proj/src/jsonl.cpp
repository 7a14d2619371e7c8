#include "jsonl.hpp"

#include <fstream>
#include <sstream>

#include "codeguard/errors.hpp"

namespace codeguard::detail {

void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const json&, std::size_t)>& fn) {
  if (path.empty()) throw ParseError("empty path", 0);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json object;
    try {
      object = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": malformed record: " + e.what(), number);
    }
    if (!object.is_object()) {
      throw ParseError(path.string() + ": record is not an object", number);
    }
    try {
      fn(object, number);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), number);
    } catch (const ValidationError& e) {
      throw ParseError(path.string() + ": " + e.what(), number);
    }
  }
}

void write_json_lines(const std::filesystem::path& path, const std::vector<json>& lines) {
  std::string out;
  for (const auto& line : lines) {
    out += line.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string get_string(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) throw ValidationError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

std::string get_string_or(const json& object, const char* key, std::string fallback) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

}  // namespace codeguard::detail
