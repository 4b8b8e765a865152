#include "dewm/watermark.hpp"

#include <cmath>
#include <limits>

#include "dewm/error.hpp"
#include "dewm/location_map.hpp"

namespace dewm {

namespace {

LocationMap expand_all_map(const std::vector<ScannedPair>& pairs) {
  LocationMap map;
  map.bits.reserve(pairs.size());
  for (const ScannedPair& p : pairs) map.bits.push_back(p.cls == PairClass::Expandable ? 1 : 0);
  return map;
}

void store(GrayImage& img, std::size_t left, AvgDiff value) {
  const PixelPair px = inverse_transform(value);
  img.pixels()[left] = static_cast<std::uint8_t>(px.x);
  img.pixels()[left + 1] = static_cast<std::uint8_t>(px.y);
}

[[noreturn]] void corrupt(const std::string& why) {
  throw Error(ErrorCode::CorruptMap, "corrupt embedded stream: " + why);
}

}  // namespace

std::vector<ScannedPair> pair_scan(const GrayImage& img) {
  std::vector<ScannedPair> pairs;
  const std::size_t per_row = img.width() / 2;
  pairs.reserve(per_row * img.height());
  const auto px = img.pixels();
  for (std::size_t y = 0; y < img.height(); ++y) {
    const std::size_t row = y * img.width();
    for (std::size_t k = 0; k < per_row; ++k) {
      const std::size_t left = row + 2 * k;
      const AvgDiff a = forward_transform({px[left], px[left + 1]});
      pairs.push_back({left, a, classify_pair(a)});
    }
  }
  return pairs;
}

CapacityInfo capacity_info(const GrayImage& img) {
  const auto pairs = pair_scan(img);
  CapacityInfo info;
  info.pairs = pairs.size();
  for (const ScannedPair& p : pairs) {
    if (p.cls == PairClass::Expandable) ++info.expandable;
    else if (p.cls == PairClass::Changeable) ++info.changeable_only;
  }
  info.map_bits = 8 * serialized_map_size(expand_all_map(pairs));
  return info;
}

std::size_t capacity(const GrayImage& img) {
  const std::int64_t usable = capacity_info(img).usable_bits();
  return usable > 0 ? static_cast<std::size_t>(usable) : 0;
}

EmbedResult embed_bits(const GrayImage& img, std::span<const std::uint8_t> payload_bits) {
  const auto pairs = pair_scan(img);
  const LocationMap map = expand_all_map(pairs);

  BitVector stream = bytes_to_bits(serialize_map(compress(map)));
  const std::size_t map_bits = stream.size();
  std::size_t expanded = 0;
  std::size_t changeable_only = 0;
  for (const ScannedPair& p : pairs) {
    if (p.cls == PairClass::Expandable) {
      ++expanded;
    } else if (p.cls == PairClass::Changeable) {
      ++changeable_only;
      stream.push_back(static_cast<std::uint8_t>(extract_bit(p.value)));
    }
  }
  stream.insert(stream.end(), payload_bits.begin(), payload_bits.end());

  const std::size_t slots = expanded + changeable_only;
  const std::int64_t usable = static_cast<std::int64_t>(slots) -
                              static_cast<std::int64_t>(map_bits + changeable_only);
  if (stream.size() > slots) {
    throw Error(ErrorCode::InsufficientCapacity,
                "payload needs " + std::to_string(payload_bits.size()) + " bits, " +
                    std::to_string(usable > 0 ? usable : 0) + " available");
  }

  EmbedResult result{img, {}};
  std::size_t slot = 0;
  for (const ScannedPair& p : pairs) {
    if (p.cls == PairClass::Unchangeable) continue;
    const bool in_stream = slot < stream.size();
    if (p.cls == PairClass::Expandable) {
      store(result.image, p.left, expand_embed_bit(p.value, in_stream ? stream[slot] : 0));
    } else {
      const int bit = in_stream ? stream[slot] : extract_bit(p.value);
      store(result.image, p.left, lsb_replace_bit(p.value, bit));
    }
    ++slot;
  }

  result.report.capacity_bits = static_cast<std::size_t>(usable);
  result.report.used_bits = payload_bits.size();
  result.report.expanded_pairs = expanded;
  result.report.changeable_pairs = changeable_only;
  result.report.psnr_db = psnr(img, result.image);
  return result;
}

EmbedResult embed(const GrayImage& img, const Payload& payload) {
  return embed_bits(img, serialize(payload));
}

DecodedStream decode_stream(const GrayImage& watermarked) {
  const auto pairs = pair_scan(watermarked);

  BitVector lsbs;
  lsbs.reserve(pairs.size());
  for (const ScannedPair& p : pairs) {
    if (p.cls != PairClass::Unchangeable) lsbs.push_back(static_cast<std::uint8_t>(extract_bit(p.value)));
  }

  const auto packed = bits_to_bytes(std::span(lsbs).first(lsbs.size() / 8 * 8));
  const ParsedMap parsed = parse_map_prefix(packed);
  const LocationMap map = decompress(parsed.map);
  if (map.bits.size() != pairs.size()) {
    corrupt("location map covers " + std::to_string(map.bits.size()) + " pairs, image has " +
            std::to_string(pairs.size()));
  }

  std::size_t changeable_only = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].cls == PairClass::Unchangeable) {
      if (map.bits[i]) corrupt("expanded pair is not changeable");
    } else if (!map.bits[i]) {
      ++changeable_only;
    }
  }
  const std::size_t saved_begin = parsed.consumed_bytes * 8;
  const std::size_t payload_begin = saved_begin + changeable_only;
  if (payload_begin > lsbs.size()) corrupt("saved LSBs truncated");

  DecodedStream out{watermarked, BitVector(lsbs.begin() + static_cast<std::ptrdiff_t>(payload_begin), lsbs.end()), {}};
  out.idle_bits.reserve(out.payload_bits.size());

  std::size_t slot = 0;
  std::size_t saved = saved_begin;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const ScannedPair& p = pairs[i];
    if (p.cls == PairClass::Unchangeable) continue;
    AvgDiff original{p.value.l, 0};
    int idle = 0;
    if (map.bits[i]) {
      original.h = floor_half(p.value.h);
      if (!is_expandable(original)) corrupt("restored difference is not expandable");
    } else {
      idle = lsbs[saved++];
      original.h = 2 * floor_half(p.value.h) + idle;
      if (is_expandable(original)) corrupt("expandable pair was left unexpanded");
    }
    if (slot >= payload_begin) out.idle_bits.push_back(static_cast<std::uint8_t>(idle));
    store(out.restored, p.left, original);
    ++slot;
  }
  return out;
}

ExtractResult extract(const GrayImage& watermarked) {
  ExtractResult result;
  DecodedStream decoded;
  try {
    decoded = decode_stream(watermarked);
  } catch (const Error& e) {
    result.restored = watermarked;
    result.diagnostic = e.what();
    return result;
  }
  result.restored = std::move(decoded.restored);

  ParsedPayload parsed;
  try {
    parsed = parse_prefix(decoded.payload_bits);
  } catch (const Error& e) {
    result.diagnostic = e.what();
    return result;
  }
  result.payload = std::move(parsed.payload);

  if (!verify(*result.payload, result.restored)) {
    result.diagnostic = "restored image does not match the embedded hash";
    return result;
  }
  for (std::size_t i = parsed.consumed_bits; i < decoded.payload_bits.size(); ++i) {
    if (decoded.payload_bits[i] != decoded.idle_bits[i]) {
      result.diagnostic = "unused embedding slot was modified";
      return result;
    }
  }
  result.verified = true;
  return result;
}

double psnr(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::DimensionMismatch, "PSNR of images with different dimensions");
  }
  std::uint64_t sse = 0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const int d = int{pa[i]} - int{pb[i]};
    sse += static_cast<std::uint64_t>(d * d);
  }
  if (sse == 0) return std::numeric_limits<double>::infinity();
  const double mse = static_cast<double>(sse) / static_cast<double>(pa.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace dewm
