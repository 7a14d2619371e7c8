#include "codeguard/tokenize.hpp"

#include <array>

namespace codeguard {
namespace {

constexpr std::array<std::string_view, 26> kOperators = {
    "<<=", ">>=", "...", "->", "::", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "<<",  ">>",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "**", "//", "=>"};

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(unsigned char c) { return is_ident_start(c) || is_digit(c); }
bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::vector<std::string> code_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (is_ident_start(c)) {
      while (j < text.size() && is_ident_char(static_cast<unsigned char>(text[j]))) ++j;
    } else if (is_digit(c)) {
      while (j < text.size() && (is_ident_char(static_cast<unsigned char>(text[j])) ||
                                 text[j] == '.')) {
        ++j;
      }
    } else {
      for (auto op : kOperators) {
        if (text.substr(i, op.size()) == op) {
          j = i + op.size();
          break;
        }
      }
    }
    tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

}  // namespace codeguard
