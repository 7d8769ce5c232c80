#pragma once
#include <string>
#include <string_view>
#include <vector>

namespace promptsweep {

std::string_view trim(std::string_view s);

// Label normalization key: trim, strip surrounding quotes/periods, collapse
// internal whitespace, ASCII case-fold. Reaches a fixpoint, so applying it
// twice is the same as applying it once.
std::string normalize_key(std::string_view raw);

// Fixed 3-decimal rendering with round-half-even on the exact binary value.
std::string format_fixed3(double value);

// Shortest round-trip decimal rendering.
std::string format_shortest(double value);

std::vector<std::string> split_lines(std::string_view text);

} // namespace promptsweep
