#pragma once

#include <cstdint>

namespace dewm {

/// A horizontally adjacent pair of gray levels (x is the left pixel).
struct PixelPair {
  int x = 0;
  int y = 0;

  bool operator==(const PixelPair&) const = default;
};

/// Integer average / difference representation of a pixel pair.
/// l = floor((x + y) / 2), h = x - y.
struct AvgDiff {
  int l = 0;
  int h = 0;

  bool operator==(const AvgDiff&) const = default;
};

enum class PairClass : std::uint8_t { Expandable, Changeable, Unchangeable };

/// Floor division by two, valid for negative numerators.
constexpr int floor_half(int v) noexcept { return v >> 1; }

/// Largest |h| that keeps both reconstructed pixels inside [0, 255].
constexpr int overflow_bound(int l) noexcept {
  const int a = 2 * (255 - l);
  const int b = 2 * l + 1;
  return a < b ? a : b;
}

AvgDiff forward_transform(PixelPair p) noexcept;

/// Throws Error(OutOfRange) if either reconstructed pixel leaves [0, 255].
PixelPair inverse_transform(AvgDiff a);

/// 2h + b stays within the bound for both b.
bool is_expandable(AvgDiff a) noexcept;
/// 2 floor(h/2) + b stays within the bound for both b.
bool is_changeable(AvgDiff a) noexcept;

PairClass classify_pair(AvgDiff a) noexcept;

/// h' = 2h + b. Throws Error(NotExpandable) unless is_expandable(a).
AvgDiff expand_embed_bit(AvgDiff a, int bit);

/// h' = 2 floor(h/2) + b. Throws Error(NotChangeable) unless is_changeable(a).
AvgDiff lsb_replace_bit(AvgDiff a, int bit);

/// Non-negative residue of h modulo 2.
constexpr int extract_bit(AvgDiff a) noexcept { return a.h & 1; }

}  // namespace dewm
