#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metaopt {

/// Dense binary vector, one byte per variable, each entry 0 or 1.
using BitVector = std::vector<std::uint8_t>;

/// "0110" style rendering; character j is variable j.
std::string to_bit_string(std::span<const std::uint8_t> bits);

/// Inverse of to_bit_string. Throws SchemaError on characters other than 0/1.
BitVector parse_bit_string(std::string_view text);

/// Bits of `value` with variable j taken from bit j (least significant first).
BitVector bits_from_index(std::uint64_t value, std::size_t n);

std::uint64_t index_from_bits(std::span<const std::uint8_t> bits);

}  // namespace metaopt
