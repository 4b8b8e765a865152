#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dewm {

/// 8-bit single-channel raster, row-major.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  /// Throws Error(DimensionMismatch) if pixels.size() != width * height.
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Binary PGM (P5) with maxval 255. Comments in the header are skipped.
/// Throws Error(Io) when the file cannot be opened and Error(Format) on a
/// malformed header or short raster.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

}  // namespace dewm
