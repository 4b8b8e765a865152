#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dewm {

/// One element per bit, each element 0 or 1.
using BitVector = std::vector<std::uint8_t>;

/// Unpacks bytes MSB-first.
BitVector bytes_to_bits(std::span<const std::uint8_t> bytes);

/// Packs bits MSB-first; the final partial byte is zero-padded.
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

void append_bits(BitVector& out, std::span<const std::uint8_t> bytes);

}  // namespace dewm
