#include "codeguard/diff.hpp"

#include <vector>

#include "codeguard/errors.hpp"

namespace codeguard {
namespace {

// Lines keep their terminating '\n' so that a missing final newline makes
// the last line compare unequal.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, end - pos + 1));
    pos = end + 1;
  }
  return lines;
}

enum class Op { Keep, Remove, Add };

struct Edit {
  Op op;
  std::string_view line;
};

// Myers' greedy O((N+M)D) shortest edit script.
std::vector<Edit> shortest_edit(const std::vector<std::string_view>& a,
                                const std::vector<std::string_view>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  const int max = n + m;
  const int offset = max + 1;
  std::vector<int> v(static_cast<std::size_t>(2 * max + 3), 0);
  std::vector<std::vector<int>> trace;

  int found_d = -1;
  for (int d = 0; d <= max && found_d < 0; ++d) {
    trace.push_back(v);
    for (int k = -d; k <= d; k += 2) {
      int x = (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1]))
                  ? v[offset + k + 1]
                  : v[offset + k - 1] + 1;
      int y = x - k;
      while (x < n && y < m && a[static_cast<std::size_t>(x)] == b[static_cast<std::size_t>(y)]) {
        ++x;
        ++y;
      }
      v[offset + k] = x;
      if (x >= n && y >= m) {
        found_d = d;
        break;
      }
    }
  }

  std::vector<Edit> script;
  int x = n;
  int y = m;
  for (int d = found_d; d > 0; --d) {
    const auto& prev = trace[static_cast<std::size_t>(d)];
    const int k = x - y;
    const bool down =
        k == -d || (k != d && prev[offset + k - 1] < prev[offset + k + 1]);
    const int prev_k = down ? k + 1 : k - 1;
    const int prev_x = prev[offset + prev_k];
    const int prev_y = prev_x - prev_k;
    while (x > prev_x && y > prev_y) {
      script.push_back({Op::Keep, a[static_cast<std::size_t>(--x)]});
      --y;
    }
    if (down) {
      script.push_back({Op::Add, b[static_cast<std::size_t>(--y)]});
    } else {
      script.push_back({Op::Remove, a[static_cast<std::size_t>(--x)]});
    }
  }
  while (x > 0 && y > 0) {
    script.push_back({Op::Keep, a[static_cast<std::size_t>(--x)]});
    --y;
  }
  return {script.rbegin(), script.rend()};
}

std::string range(std::size_t count) {
  if (count == 0) return "0,0";
  if (count == 1) return "1";
  return "1," + std::to_string(count);
}

}  // namespace

std::string compute_diff(std::string_view vulnerable_code, std::string_view fixed_code) {
  if (vulnerable_code == fixed_code) {
    throw ValidationError("cannot diff identical vulnerable and fixed code");
  }
  const auto old_lines = split_lines(vulnerable_code);
  const auto new_lines = split_lines(fixed_code);

  std::string out = "--- vulnerable\n+++ fixed\n";
  out += "@@ -" + range(old_lines.size()) + " +" + range(new_lines.size()) + " @@\n";
  for (const Edit& edit : shortest_edit(old_lines, new_lines)) {
    out += edit.op == Op::Keep ? ' ' : edit.op == Op::Remove ? '-' : '+';
    out += edit.line;
    if (edit.line.empty() || edit.line.back() != '\n') {
      out += "\n\\ No newline at end of file\n";
    }
  }
  return out;
}

}  // namespace codeguard
