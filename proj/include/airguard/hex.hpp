#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace airguard {

// Lowercase hex, two chars per byte, no separators.
std::string to_hex(std::span<const std::uint8_t> bytes);

// Accepts upper or lower case. Throws ParseError on odd length or a
// non-hex character (position = 1-indexed character column).
std::vector<std::uint8_t> from_hex(std::string_view text);

} // namespace airguard
