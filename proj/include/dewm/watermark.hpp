#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dewm/bits.hpp"
#include "dewm/image.hpp"
#include "dewm/payload.hpp"
#include "dewm/pixel_codec.hpp"

namespace dewm {

/// Pixels are paired horizontally, (p[2k], p[2k+1]) in each row. With an odd
/// width the last pixel of every row is never paired or modified.
struct ScannedPair {
  std::size_t left;  // pixel index of x; y sits at left + 1
  AvgDiff value;
  PairClass cls;
};

std::vector<ScannedPair> pair_scan(const GrayImage& img);

/// Bit accounting for embedding into `img` when every expandable pair is
/// expanded.
struct CapacityInfo {
  std::size_t pairs = 0;
  std::size_t expandable = 0;
  std::size_t changeable_only = 0;  // changeable but not expandable
  std::size_t map_bits = 0;         // serialized compressed location map

  std::size_t slots() const noexcept { return expandable + changeable_only; }
  std::size_t saved_lsb_bits() const noexcept { return changeable_only; }
  /// Slots left for the payload; negative when overhead exceeds slots.
  std::int64_t usable_bits() const noexcept {
    return static_cast<std::int64_t>(slots()) - static_cast<std::int64_t>(map_bits) -
           static_cast<std::int64_t>(saved_lsb_bits());
  }
};

CapacityInfo capacity_info(const GrayImage& img);

/// Usable payload capacity in bits, clamped at zero.
std::size_t capacity(const GrayImage& img);

struct EmbedReport {
  std::size_t capacity_bits = 0;
  std::size_t used_bits = 0;
  std::size_t expanded_pairs = 0;
  std::size_t changeable_pairs = 0;  // changeable pairs that were not expanded
  double psnr_db = 0;                // +infinity when nothing changed
};

struct EmbedResult {
  GrayImage image;
  EmbedReport report;
};

/// Embeds map || saved LSBs || payload_bits. Slots past the end of the
/// stream carry 0 (expanded pairs) or keep their original LSB (changeable
/// pairs). Throws Error(InsufficientCapacity).
EmbedResult embed_bits(const GrayImage& img, std::span<const std::uint8_t> payload_bits);

EmbedResult embed(const GrayImage& img, const Payload& payload);

struct DecodedStream {
  GrayImage restored;
  /// Every slot after the location map and the saved LSBs.
  BitVector payload_bits;
  /// What an unused slot holds after embedding, aligned with payload_bits.
  BitVector idle_bits;
};

/// Blind decoding and restoration. Throws Error(CorruptMap) when the
/// embedded location map is malformed or inconsistent with the image.
DecodedStream decode_stream(const GrayImage& watermarked);

struct ExtractResult {
  GrayImage restored;  // the input itself when the map could not be decoded
  std::optional<Payload> payload;
  /// Restored image matches the embedded hash and every unused slot holds
  /// its idle value.
  bool verified = false;
  std::string diagnostic;
};

/// Never throws for damaged input; failures surface through `verified`
/// and `diagnostic`.
ExtractResult extract(const GrayImage& watermarked);

/// 10 log10(255^2 / MSE); +infinity for identical images.
/// Throws Error(DimensionMismatch).
double psnr(const GrayImage& a, const GrayImage& b);

}  // namespace dewm
