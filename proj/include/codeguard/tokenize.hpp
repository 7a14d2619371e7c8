#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace codeguard {

// Splits source text on identifier / number / operator boundaries. Common
// multi-character operators ("->", "==", "<<=", ...) stay whole; every other
// non-space character is its own token.
std::vector<std::string> code_tokens(std::string_view text);

}  // namespace codeguard
