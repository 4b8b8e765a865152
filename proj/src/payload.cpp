#include "dewm/payload.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <cmath>
#include <limits>
#include <memory>

#include "dewm/error.hpp"

namespace dewm {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'D', 'E', 'W', '1'};

void put_be(std::vector<std::uint8_t>& out, std::uint64_t value, int bytes) {
  for (int shift = 8 * (bytes - 1); shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(value >> shift));
  }
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

void check_limits(const Payload& p) {
  if (p.locator.size() > kMaxLocatorBytes) {
    throw Error(ErrorCode::FieldTooLong,
                "locator is " + std::to_string(p.locator.size()) + " bytes (max 1024)");
  }
  if (p.patient_code.size() > kMaxPatientCodeBytes) {
    throw Error(ErrorCode::FieldTooLong,
                "patient code is " + std::to_string(p.patient_code.size()) + " bytes (max 64)");
  }
}

// Reads whole bytes from a bit sequence starting at an arbitrary bit.
class BitCursor {
 public:
  explicit BitCursor(std::span<const std::uint8_t> bits) : bits_(bits) {}

  std::uint8_t byte() {
    if (bits_.size() - pos_ < 8) {
      throw Error(ErrorCode::MalformedPayload, "payload truncated");
    }
    std::uint8_t v = 0;
    for (int i = 0; i < 8; ++i) v = static_cast<std::uint8_t>((v << 1) | (bits_[pos_++] & 1u));
    consumed_.push_back(v);
    return v;
  }

  std::uint64_t be(int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v = (v << 8) | byte();
    return v;
  }

  std::string text(std::size_t len) {
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>(byte()));
    return s;
  }

  std::size_t position() const noexcept { return pos_; }
  const std::vector<std::uint8_t>& consumed() const noexcept { return consumed_; }

 private:
  std::span<const std::uint8_t> bits_;
  std::size_t pos_ = 0;
  std::vector<std::uint8_t> consumed_;
};

}  // namespace

Digest compute_image_hash(const GrayImage& img) {
  std::vector<std::uint8_t> header;
  put_be(header, img.width(), 4);
  put_be(header, img.height(), 4);

  const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                    &EVP_MD_CTX_free);
  Digest out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), img.pixels().data(), img.pixels().size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return out;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(digest.size() * 2);
  for (const std::uint8_t b : digest) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

std::int32_t to_fixed(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteFeature, "feature value is not finite");
  }
  const double scaled = std::nearbyint(value * 65536.0);
  if (scaled < static_cast<double>(std::numeric_limits<std::int32_t>::min()) ||
      scaled > static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
    throw Error(ErrorCode::FeatureOutOfRange,
                "feature value " + std::to_string(value) + " exceeds the Q16.16 range");
  }
  return static_cast<std::int32_t>(scaled);
}

double from_fixed(std::int32_t word) noexcept { return static_cast<double>(word) / 65536.0; }

FeatureVector quantize_features(const FeatureVector& f) {
  auto values = f.to_array();
  for (double& v : values) v = from_fixed(to_fixed(v));
  return FeatureVector::from_array(values);
}

std::size_t serialized_size(const Payload& p) noexcept {
  return kPayloadBaseBytes + p.locator.size() + p.patient_code.size();
}

std::vector<std::uint8_t> serialize_bytes(const Payload& p) {
  check_limits(p);
  std::vector<std::uint8_t> out;
  out.reserve(serialized_size(p));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(kPayloadVersion);
  out.insert(out.end(), p.hash.begin(), p.hash.end());
  put_be(out, p.locator.size(), 2);
  out.insert(out.end(), p.locator.begin(), p.locator.end());
  put_be(out, p.patient_code.size(), 1);
  out.insert(out.end(), p.patient_code.begin(), p.patient_code.end());
  for (const double v : p.features.to_array()) {
    put_be(out, static_cast<std::uint32_t>(to_fixed(v)), 4);
  }
  put_be(out, crc32_of(out), 4);
  return out;
}

BitVector serialize(const Payload& p) { return bytes_to_bits(serialize_bytes(p)); }

ParsedPayload parse_prefix(std::span<const std::uint8_t> bits) {
  BitCursor in(bits);
  for (const std::uint8_t expected : kMagic) {
    if (in.byte() != expected) throw Error(ErrorCode::BadMagic, "payload magic mismatch");
  }
  const std::uint8_t version = in.byte();
  if (version != kPayloadVersion) {
    throw Error(ErrorCode::BadVersion, "unsupported payload version " + std::to_string(version));
  }
  ParsedPayload out;
  for (auto& b : out.payload.hash) b = in.byte();
  const auto locator_len = static_cast<std::size_t>(in.be(2));
  if (locator_len > kMaxLocatorBytes) {
    throw Error(ErrorCode::FieldTooLong, "embedded locator length exceeds 1024");
  }
  out.payload.locator = in.text(locator_len);
  const auto code_len = static_cast<std::size_t>(in.byte());
  if (code_len > kMaxPatientCodeBytes) {
    throw Error(ErrorCode::FieldTooLong, "embedded patient code length exceeds 64");
  }
  out.payload.patient_code = in.text(code_len);
  std::array<double, FeatureVector::kSize> features{};
  for (double& v : features) v = from_fixed(static_cast<std::int32_t>(in.be(4)));
  out.payload.features = FeatureVector::from_array(features);

  const std::uint32_t computed = crc32_of(in.consumed());
  if (static_cast<std::uint32_t>(in.be(4)) != computed) {
    throw Error(ErrorCode::CrcMismatch, "payload checksum mismatch");
  }
  out.consumed_bits = in.position();
  return out;
}

Payload parse(std::span<const std::uint8_t> bits) {
  ParsedPayload parsed = parse_prefix(bits);
  if (parsed.consumed_bits != bits.size()) {
    throw Error(ErrorCode::MalformedPayload, "trailing bits after payload");
  }
  return std::move(parsed.payload);
}

bool verify(const Payload& p, const GrayImage& restored) {
  return compute_image_hash(restored) == p.hash;
}

}  // namespace dewm
