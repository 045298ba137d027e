#pragma once

#include <cstdint>
#include <span>

// Test-only FCS oracle: bit-serial long division over the reflected
// 802.15.4 polynomial, independent of the table-driven implementation in
// the library.
inline std::uint16_t fcs_bitwise(std::span<const std::uint8_t> data)
{
    std::uint16_t remainder = 0x0000;
    for (std::uint8_t byte : data) {
        remainder ^= byte;
        for (int bit = 0; bit < 8; ++bit) {
            if (remainder & 1) {
                remainder = static_cast<std::uint16_t>((remainder >> 1) ^ 0x8408);
            } else {
                remainder >>= 1;
            }
        }
    }
    return remainder;
}
