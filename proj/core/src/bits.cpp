#include "metaopt/bits.hpp"

#include "metaopt/errors.hpp"

namespace metaopt {

std::string to_bit_string(std::span<const std::uint8_t> bits) {
  std::string out(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != 0) out[i] = '1';
  }
  return out;
}

BitVector parse_bit_string(std::string_view text) {
  BitVector bits(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '0') {
      bits[i] = 0;
    } else if (text[i] == '1') {
      bits[i] = 1;
    } else {
      throw SchemaError("bit string contains '" + std::string(1, text[i]) + "' at position " +
                        std::to_string(i));
    }
  }
  return bits;
}

BitVector bits_from_index(std::uint64_t value, std::size_t n) {
  BitVector bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>((value >> i) & 1U);
  return bits;
}

std::uint64_t index_from_bits(std::span<const std::uint8_t> bits) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < bits.size() && i < 64; ++i) {
    if (bits[i] != 0) value |= std::uint64_t{1} << i;
  }
  return value;
}

}  // namespace metaopt
