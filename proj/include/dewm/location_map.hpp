#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dewm/bits.hpp"
#include "dewm/pixel_codec.hpp"

namespace dewm {

/// One bit per pixel pair in raster order; 1 marks an expanded pair.
struct LocationMap {
  BitVector bits;

  bool operator==(const LocationMap&) const = default;
};

enum class MapMode : std::uint8_t { Raw = 0, RunLength = 1 };

/// Losslessly packed LocationMap.
///
/// Raw: bits packed MSB-first, final byte zero-padded.
/// RunLength: unsigned LEB128 run lengths alternating 0-runs and 1-runs,
/// starting with a (possibly empty) 0-run. Only the first run may be empty.
struct CompressedMap {
  MapMode mode = MapMode::Raw;
  std::vector<std::uint8_t> body;
  std::uint32_t bit_count = 0;

  bool operator==(const CompressedMap&) const = default;
};

/// Serialized header: mode byte + 4-byte big-endian bit_count.
inline constexpr std::size_t kMapHeaderBytes = 5;

/// Throws Error(SelectionMismatch) if a non-expandable pair is selected or
/// the sequences differ in length.
LocationMap build_map(std::span<const PairClass> classes, std::span<const std::uint8_t> selected);

/// Picks RunLength only when its body is strictly smaller than Raw.
CompressedMap compress(const LocationMap& map);

/// Throws Error(CorruptMap) on truncated, over-long or non-canonical bodies.
LocationMap decompress(const CompressedMap& map);

std::vector<std::uint8_t> serialize_map(const CompressedMap& map);

struct ParsedMap {
  CompressedMap map;
  std::size_t consumed_bytes = 0;
};

/// Reads a serialized map from the front of `bytes`; trailing data is left
/// untouched. Throws Error(CorruptMap) when the prefix is malformed.
ParsedMap parse_map_prefix(std::span<const std::uint8_t> bytes);

/// Size in bytes of serialize_map(compress(map)) without building it.
std::size_t serialized_map_size(const LocationMap& map);

}  // namespace dewm
