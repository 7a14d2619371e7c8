// Regenerates tests/fixtures. Usage: codeguard_make_fixtures <dir>
#include <exception>
#include <iostream>

#include "fixture_data.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <fixture-dir>\n";
    return 2;
  }
  try {
    fixtures::write_fixtures(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
