#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "codeguard/diff.hpp"
#include "codeguard/errors.hpp"
#include "test_util.hpp"

using namespace codeguard;

namespace {

std::size_t count_prefixed(const std::string& diff, char tag) {
  std::size_t n = 0;
  std::size_t pos = 0;
  bool first_lines = true;
  while (pos < diff.size()) {
    auto nl = diff.find('\n', pos);
    const std::string line = diff.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (line.rfind("@@", 0) == 0) first_lines = false;
    if (!first_lines && !line.empty() && line[0] == tag) ++n;
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return n;
}

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// GNU diff with the whole file as context.
std::string system_diff(const testutil::TempDir& dir, const std::string& a, const std::string& b,
                        bool minimal) {
  write(dir / "a", a);
  write(dir / "b", b);
  const std::string cmd = std::string("diff ") + (minimal ? "--minimal " : "") +
                          "-U1000000 --label vulnerable --label fixed '" + (dir / "a").string() +
                          "' '" + (dir / "b").string() + "'";
  std::FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  ::pclose(pipe);
  return out;
}

bool have_system_diff() { return std::system("diff --version > /dev/null 2>&1") == 0; }

}  // namespace

TEST(Diff, TwoLineChange) {
  const auto d = compute_diff("a\nb\n", "a\nc\n");
  EXPECT_EQ(d, "--- vulnerable\n+++ fixed\n@@ -1,2 +1,2 @@\n a\n-b\n+c\n");
}

TEST(Diff, StrcpyToStrncpy) {
  const std::string vulnerable = "void f(char *d, const char *s) {\n    strcpy(d, s);\n}\n";
  const std::string fixed =
      "void f(char *d, const char *s) {\n    strncpy(d, s, 15);\n    d[15] = 0;\n}\n";
  const auto d = compute_diff(vulnerable, fixed);
  EXPECT_NE(d.find("\n-    strcpy(d, s);\n"), std::string::npos);
  EXPECT_NE(d.find("\n+    strncpy(d, s, 15);\n"), std::string::npos);
  EXPECT_NE(d.find("\n void f("), std::string::npos) << "full context is kept";
}

TEST(Diff, IdenticalInputsAreRejected) {
  EXPECT_THROW(compute_diff("x\n", "x\n"), ValidationError);
  EXPECT_THROW(compute_diff("", ""), ValidationError);
}

TEST(Diff, MissingFinalNewlineIsMarked) {
  const auto d = compute_diff("a\nb", "a\nb\n");
  EXPECT_EQ(d,
            "--- vulnerable\n+++ fixed\n@@ -1,2 +1,2 @@\n a\n-b\n\\ No newline at end of file\n"
            "+b\n");
}

TEST(Diff, EmptySides) {
  EXPECT_EQ(compute_diff("", "x\n"), "--- vulnerable\n+++ fixed\n@@ -0,0 +1 @@\n+x\n");
  EXPECT_EQ(compute_diff("x\n", ""), "--- vulnerable\n+++ fixed\n@@ -1 +0,0 @@\n-x\n");
}

TEST(Diff, AppendMatchesSystemDiff) {
  if (!have_system_diff()) GTEST_SKIP() << "diff(1) not available";
  testutil::TempDir dir;
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    std::string x = testutil::random_code(rng);
    if (!x.empty() && x.back() != '\n') x += '\n';
    const std::string fixed = x + "z\n";
    const auto d = compute_diff(x, fixed);
    EXPECT_EQ(count_prefixed(d, '+'), 1u);
    EXPECT_EQ(count_prefixed(d, '-'), 0u);
    EXPECT_NE(d.find("\n+z\n"), std::string::npos);
    EXPECT_EQ(d, system_diff(dir, x, fixed, false));
  }
}

TEST(Diff, EditCountEqualsMinimalSystemDiff) {
  if (!have_system_diff()) GTEST_SKIP() << "diff(1) not available";
  testutil::TempDir dir;
  std::mt19937_64 rng(22);
  for (int i = 0; i < 60; ++i) {
    const std::string a = testutil::random_code(rng, 20);
    const std::string b = testutil::mutate_code(rng, a);
    const auto ours = compute_diff(a, b);
    const auto theirs = system_diff(dir, a, b, true);
    EXPECT_EQ(count_prefixed(ours, '+') + count_prefixed(ours, '-'),
              count_prefixed(theirs, '+') + count_prefixed(theirs, '-'))
        << ours << "\n----\n" << theirs;
    EXPECT_EQ(testutil::apply_unified_diff(a, theirs), b) << "oracle check on the system diff";
  }
}

TEST(Diff, PatchReconstructsFixedSide) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    const std::string a = testutil::random_code(rng, 25);
    const std::string b = testutil::mutate_code(rng, a);
    EXPECT_EQ(testutil::apply_unified_diff(a, compute_diff(a, b)), b);
  }
}
