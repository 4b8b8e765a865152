#include "dewm/location_map.hpp"

#include <string>

#include "dewm/error.hpp"

namespace dewm {

namespace {

constexpr std::size_t kMaxVarintBytes = 5;

void put_varint(std::vector<std::uint8_t>& out, std::uint32_t value) {
  while (value >= 0x80u) {
    out.push_back(static_cast<std::uint8_t>((value & 0x7Fu) | 0x80u));
    value >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(value));
}

std::size_t varint_size(std::uint32_t value) {
  std::size_t n = 1;
  while (value >= 0x80u) {
    value >>= 7;
    ++n;
  }
  return n;
}

[[noreturn]] void corrupt(const std::string& why) {
  throw Error(ErrorCode::CorruptMap, "corrupt location map: " + why);
}

// Visits run lengths in encoding order (first run counts zeros).
template <typename Fn>
void for_each_run(const BitVector& bits, Fn&& fn) {
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (const std::uint8_t b : bits) {
    if (b == current) {
      ++run;
    } else {
      fn(run);
      current = b;
      run = 1;
    }
  }
  if (run > 0 || bits.empty()) fn(run);
}

std::size_t raw_body_size(std::size_t bit_count) { return (bit_count + 7) / 8; }

std::size_t run_length_body_size(const BitVector& bits) {
  std::size_t size = 0;
  for_each_run(bits, [&](std::uint32_t run) { size += varint_size(run); });
  return size;
}

// Decodes one RunLength body starting at `pos`; stops once bit_count bits
// are produced. Returns the position after the last consumed byte.
std::size_t decode_runs(std::span<const std::uint8_t> body, std::size_t pos,
                        std::uint32_t bit_count, BitVector* out) {
  std::uint64_t produced = 0;
  std::uint8_t current = 0;
  bool first = true;
  while (produced < bit_count || first) {
    if (pos >= body.size()) corrupt("run-length body truncated");
    std::uint64_t run = 0;
    std::size_t n = 0;
    for (;;) {
      if (pos >= body.size()) corrupt("varint truncated");
      if (n == kMaxVarintBytes) corrupt("varint too long");
      const std::uint8_t byte = body[pos++];
      run |= static_cast<std::uint64_t>(byte & 0x7Fu) << (7 * n);
      ++n;
      if ((byte & 0x80u) == 0) break;
    }
    if (run == 0 && !first) corrupt("empty run after the first");
    if (produced + run > bit_count) corrupt("runs exceed bit count");
    if (out) out->insert(out->end(), static_cast<std::size_t>(run), current);
    produced += run;
    current ^= 1u;
    first = false;
    if (bit_count == 0) break;
  }
  return pos;
}

LocationMap unpack_raw(std::span<const std::uint8_t> body, std::uint32_t bit_count) {
  LocationMap map;
  map.bits.reserve(bit_count);
  for (std::uint32_t i = 0; i < bit_count; ++i) {
    map.bits.push_back((body[i / 8] >> (7 - i % 8)) & 1u);
  }
  const std::uint32_t tail = bit_count % 8;
  if (tail != 0 && (body[bit_count / 8] & (0xFFu >> tail)) != 0) {
    corrupt("nonzero raw padding");
  }
  return map;
}

}  // namespace

LocationMap build_map(std::span<const PairClass> classes, std::span<const std::uint8_t> selected) {
  if (classes.size() != selected.size()) {
    throw Error(ErrorCode::SelectionMismatch, "class and selection sequences differ in length");
  }
  LocationMap map;
  map.bits.resize(classes.size(), 0);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!selected[i]) continue;
    if (classes[i] != PairClass::Expandable) {
      throw Error(ErrorCode::SelectionMismatch,
                  "pair " + std::to_string(i) + " selected but not expandable");
    }
    map.bits[i] = 1;
  }
  return map;
}

CompressedMap compress(const LocationMap& map) {
  CompressedMap out;
  out.bit_count = static_cast<std::uint32_t>(map.bits.size());
  if (run_length_body_size(map.bits) < raw_body_size(map.bits.size())) {
    out.mode = MapMode::RunLength;
    for_each_run(map.bits, [&](std::uint32_t run) { put_varint(out.body, run); });
  } else {
    out.mode = MapMode::Raw;
    out.body = bits_to_bytes(map.bits);
  }
  return out;
}

LocationMap decompress(const CompressedMap& map) {
  if (map.mode == MapMode::Raw) {
    const std::size_t expected = raw_body_size(map.bit_count);
    if (map.body.size() < expected) corrupt("raw body truncated");
    if (map.body.size() > expected) corrupt("raw body over-long");
    return unpack_raw(map.body, map.bit_count);
  }
  if (map.mode != MapMode::RunLength) corrupt("unknown mode");
  LocationMap out;
  out.bits.reserve(map.bit_count);
  const std::size_t end = decode_runs(map.body, 0, map.bit_count, &out.bits);
  if (end != map.body.size()) corrupt("run-length body over-long");
  return out;
}

std::vector<std::uint8_t> serialize_map(const CompressedMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(kMapHeaderBytes + map.body.size());
  out.push_back(static_cast<std::uint8_t>(map.mode));
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(map.bit_count >> shift));
  }
  out.insert(out.end(), map.body.begin(), map.body.end());
  return out;
}

ParsedMap parse_map_prefix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMapHeaderBytes) corrupt("header truncated");
  ParsedMap parsed;
  const std::uint8_t mode = bytes[0];
  if (mode > static_cast<std::uint8_t>(MapMode::RunLength)) corrupt("unknown mode");
  parsed.map.mode = static_cast<MapMode>(mode);
  parsed.map.bit_count = (std::uint32_t{bytes[1]} << 24) | (std::uint32_t{bytes[2]} << 16) |
                         (std::uint32_t{bytes[3]} << 8) | std::uint32_t{bytes[4]};
  const auto rest = bytes.subspan(kMapHeaderBytes);
  std::size_t body_size = 0;
  if (parsed.map.mode == MapMode::Raw) {
    body_size = raw_body_size(parsed.map.bit_count);
    if (rest.size() < body_size) corrupt("raw body truncated");
  } else {
    body_size = decode_runs(rest, 0, parsed.map.bit_count, nullptr);
  }
  parsed.map.body.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(body_size));
  parsed.consumed_bytes = kMapHeaderBytes + body_size;
  return parsed;
}

std::size_t serialized_map_size(const LocationMap& map) {
  const std::size_t raw = raw_body_size(map.bits.size());
  const std::size_t rle = run_length_body_size(map.bits);
  return kMapHeaderBytes + (rle < raw ? rle : raw);
}

}  // namespace dewm
