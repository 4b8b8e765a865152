#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dewm/bits.hpp"
#include "dewm/features.hpp"
#include "dewm/image.hpp"

namespace dewm {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kMaxLocatorBytes = 1024;
inline constexpr std::size_t kMaxPatientCodeBytes = 64;
inline constexpr std::uint8_t kPayloadVersion = 1;
/// Wire size with empty locator and patient code.
inline constexpr std::size_t kPayloadBaseBytes = 4 + 1 + 32 + 2 + 1 + 4 * FeatureVector::kSize + 4;

/// The multipurpose mark carried by every watermarked image.
struct Payload {
  Digest hash{};             // SHA-256 of the original pixels
  std::string locator;       // external file path, at most 1024 bytes
  FeatureVector features;    // extracted from the original image
  std::string patient_code;  // at most 64 bytes

  bool operator==(const Payload&) const = default;
};

/// SHA-256 over width (4 bytes BE), height (4 bytes BE), then the row-major
/// pixel bytes.
Digest compute_image_hash(const GrayImage& img);

std::string to_hex(const Digest& digest);

/// Q16.16, rounded to nearest. Throws NonFiniteFeature / FeatureOutOfRange.
std::int32_t to_fixed(double value);
double from_fixed(std::int32_t word) noexcept;

/// Rounds every component to the nearest Q16.16 value, i.e. what survives
/// a serialize/parse round trip.
FeatureVector quantize_features(const FeatureVector& f);

/// Wire layout, all integers big-endian:
///   "DEW1" | version (1) | hash (32) | locator_len (2) locator |
///   code_len (1) code | 10 x Q16.16 int32 | crc32 of everything before
std::vector<std::uint8_t> serialize_bytes(const Payload& p);
BitVector serialize(const Payload& p);
std::size_t serialized_size(const Payload& p) noexcept;

struct ParsedPayload {
  Payload payload;
  std::size_t consumed_bits = 0;
};

/// Parses a payload from the front of `bits`; trailing bits are ignored.
/// Throws BadMagic, BadVersion, MalformedPayload, FieldTooLong or
/// CrcMismatch.
ParsedPayload parse_prefix(std::span<const std::uint8_t> bits);

/// Like parse_prefix but rejects trailing bits.
Payload parse(std::span<const std::uint8_t> bits);

/// True iff the restored image hashes to p.hash.
bool verify(const Payload& p, const GrayImage& restored);

}  // namespace dewm
