#pragma once

// Line-delimited JSON helpers shared by every persisted format.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace codeguard::detail {

using nlohmann::json;

// Calls fn(object, line_number) for each non-blank line. Throws ParseError
// naming the line for unparsable JSON or non-object lines, and for anything
// fn throws as json::exception. An empty path or missing file is a
// ParseError with line 0.
void for_each_json_line(const std::filesystem::path& path,
                        const std::function<void(const json&, std::size_t)>& fn);

// Writes objects one per line (compact, sorted keys, trailing newline).
void write_json_lines(const std::filesystem::path& path, const std::vector<json>& lines);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Typed field access with a clear message on absence or wrong type.
std::string get_string(const json& object, const char* key);
std::string get_string_or(const json& object, const char* key, std::string fallback);

}  // namespace codeguard::detail
