#pragma once

#include <string>
#include <string_view>

namespace codeguard {

// Unified diff of two source texts with the whole input as context (a single
// hunk, no elided lines). Header lines are "--- vulnerable" / "+++ fixed".
// A final line without a trailing newline is followed by the usual
// "\ No newline at end of file" marker. Throws ValidationError when the
// inputs are identical.
std::string compute_diff(std::string_view vulnerable_code, std::string_view fixed_code);

}  // namespace codeguard
