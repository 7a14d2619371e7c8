#include <gtest/gtest.h>

#include "fixture_data.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

// The checked-in fixture tree must match what the generator writes today.
TEST(Fixtures, CheckedInTreeIsCurrent) {
  testutil::TempDir dir;
  fixtures::write_fixtures(dir.path());
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir.path());
    const auto checked_in = testutil::fixture_dir() / rel;
    ASSERT_TRUE(fs::exists(checked_in)) << rel << " missing; run codeguard_make_fixtures";
    EXPECT_EQ(testutil::read_bytes(entry.path()), testutil::read_bytes(checked_in))
        << rel << " is stale; run codeguard_make_fixtures";
    ++compared;
  }
  EXPECT_GE(compared, 15u);
}

TEST(Fixtures, Sizes) {
  EXPECT_EQ(fixtures::vulnerabilities().size(), 10u);
  EXPECT_EQ(fixtures::functional_corpus().size(), 20u);
  EXPECT_EQ(fixtures::vulnerable_corpus().size(), 5u);
  EXPECT_EQ(fixtures::vulnerable_pool().size(), 12u);
  EXPECT_EQ(fixtures::scenario_cases().size(), 4u);
  EXPECT_EQ(fixtures::attack_queries().size(), 3u);
}
