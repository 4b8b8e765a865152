#include "dewm/bits.hpp"

namespace dewm {

BitVector bytes_to_bits(std::span<const std::uint8_t> bytes) {
  BitVector bits;
  append_bits(bits, bytes);
  return bits;
}

void append_bits(BitVector& out, std::span<const std::uint8_t> bytes) {
  out.reserve(out.size() + bytes.size() * 8);
  for (const std::uint8_t byte : bytes) {
    for (int shift = 7; shift >= 0; --shift) out.push_back((byte >> shift) & 1u);
  }
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] & 1u) bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return bytes;
}

}  // namespace dewm
