#include "dewm/pixel_codec.hpp"

#include <cstdlib>
#include <string>

#include "dewm/error.hpp"

namespace dewm {

namespace {

bool within_bound(int h, int l) noexcept { return std::abs(h) <= overflow_bound(l); }

std::string describe(AvgDiff a) {
  return "(l=" + std::to_string(a.l) + ", h=" + std::to_string(a.h) + ")";
}

}  // namespace

AvgDiff forward_transform(PixelPair p) noexcept {
  return {floor_half(p.x + p.y), p.x - p.y};
}

PixelPair inverse_transform(AvgDiff a) {
  const PixelPair p{a.l + floor_half(a.h + 1), a.l - floor_half(a.h)};
  if (p.x < 0 || p.x > 255 || p.y < 0 || p.y > 255) {
    throw Error(ErrorCode::OutOfRange,
                "inverse transform of " + describe(a) + " leaves [0,255]");
  }
  return p;
}

bool is_expandable(AvgDiff a) noexcept {
  return within_bound(2 * a.h, a.l) && within_bound(2 * a.h + 1, a.l);
}

bool is_changeable(AvgDiff a) noexcept {
  const int base = 2 * floor_half(a.h);
  return within_bound(base, a.l) && within_bound(base + 1, a.l);
}

PairClass classify_pair(AvgDiff a) noexcept {
  if (is_expandable(a)) return PairClass::Expandable;
  if (is_changeable(a)) return PairClass::Changeable;
  return PairClass::Unchangeable;
}

AvgDiff expand_embed_bit(AvgDiff a, int bit) {
  if (!is_expandable(a)) {
    throw Error(ErrorCode::NotExpandable, "pair " + describe(a) + " is not expandable");
  }
  return {a.l, 2 * a.h + (bit & 1)};
}

AvgDiff lsb_replace_bit(AvgDiff a, int bit) {
  if (!is_changeable(a)) {
    throw Error(ErrorCode::NotChangeable, "pair " + describe(a) + " is not changeable");
  }
  return {a.l, 2 * floor_half(a.h) + (bit & 1)};
}

}  // namespace dewm
