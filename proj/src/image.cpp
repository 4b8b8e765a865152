#include "dewm/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "dewm/error.hpp"

namespace dewm {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(width * height, fill) {}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (pixels_.size() != width_ * height_) {
    throw Error(ErrorCode::DimensionMismatch,
                "pixel buffer of " + std::to_string(pixels_.size()) + " bytes for a " +
                    std::to_string(width_) + "x" + std::to_string(height_) + " image");
  }
}

namespace {

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, std::size_t start)
      : bytes_(bytes), pos_(start) {}

  std::size_t next_number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (++digits > 9) throw Error(ErrorCode::Format, "PGM header value too large");
    }
    if (digits == 0) throw Error(ErrorCode::Format, "malformed PGM header");
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::Format, "missing separator before PGM raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::Format, "not a binary PGM (P5) file");
  }
  HeaderReader reader(bytes, 2);
  const std::size_t width = reader.next_number();
  const std::size_t height = reader.next_number();
  const std::size_t maxval = reader.next_number();
  if (width == 0 || height == 0) throw Error(ErrorCode::Format, "PGM has zero dimension");
  if (maxval != 255) {
    throw Error(ErrorCode::Format, "unsupported PGM maxval " + std::to_string(maxval));
  }
  const std::size_t offset = reader.raster_offset();
  const std::size_t count = width * height;
  if (bytes.size() - offset < count) throw Error(ErrorCode::Format, "PGM raster truncated");
  std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(offset + count));
  return GrayImage(width, height, std::move(pixels));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};
  return decode_pgm(bytes);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace dewm
