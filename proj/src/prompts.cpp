#include "codeguard/prompts.hpp"

#include "codeguard/errors.hpp"

namespace codeguard::prompts {

std::string render(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw ConfigError("unterminated placeholder in prompt template");
    }
    std::string name(text.substr(open + 2, close - open - 2));
    auto it = values.find(name);
    if (it == values.end()) throw ConfigError("no value for placeholder " + name);
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

}  // namespace codeguard::prompts
