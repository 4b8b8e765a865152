#pragma once

// Synthetic images and scratch directories shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "dewm/image.hpp"
#include "dewm/payload.hpp"

namespace dewm::synth {

inline std::uint8_t clamp_level(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

/// Slowly varying sinusoidal texture plus mild Gaussian noise.
inline GrayImage smooth_texture(std::size_t w, std::size_t h, std::uint64_t seed,
                                double noise_sigma = 1.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 6.283);
  std::uniform_real_distribution<double> base(70.0, 180.0);
  std::uniform_real_distribution<double> amp(10.0, 45.0);
  std::uniform_real_distribution<double> period(12.0, 40.0);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  const double b = base(rng), a = amp(rng), px = period(rng), py = period(rng);
  const double fx = phase(rng), fy = phase(rng);
  GrayImage img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      img.at(x, y) = clamp_level(b + a * std::sin(x / px + fx) * std::cos(y / py + fy) + noise(rng));
    }
  }
  return img;
}

inline GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GrayImage img(w, h);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(rng() & 0xFF);
  return img;
}

inline Payload random_payload(std::mt19937_64& rng, std::size_t locator_len, std::size_t code_len) {
  Payload p;
  for (auto& b : p.hash) b = static_cast<std::uint8_t>(rng());
  const auto text = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('!' + rng() % 94));
    return s;
  };
  p.locator = text(locator_len);
  p.patient_code = text(code_len);
  std::array<double, FeatureVector::kSize> f{};
  for (double& v : f) {
    v = from_fixed(static_cast<std::int32_t>(static_cast<std::int64_t>(rng() % 2000000001ULL) - 1000000000LL));
  }
  p.features = FeatureVector::from_array(f);
  return p;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dewm-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace dewm::synth

namespace dewm::synth {

/// Three visually distinct synthetic modalities standing in for the
/// mammography / bone / cardiac test classes.
enum class Modality { Mammography, Bone, Cardiac };

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::Mammography: return "mammography";
    case Modality::Bone: return "bone";
    case Modality::Cardiac: return "cardiac";
  }
  return "?";
}

inline GrayImage modality_image(Modality m, std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(w, h);
  const double W = static_cast<double>(w), H = static_cast<double>(h);
  switch (m) {
    case Modality::Mammography: {
      // dark field with a bright half-ellipse hugging one edge
      std::normal_distribution<double> noise(0.0, 1.5);
      const double cx = (u(rng) < 0.5 ? 0.0 : 1.0) * W, cy = H * (0.4 + 0.2 * u(rng));
      const double rx = W * (0.55 + 0.1 * u(rng)), ry = H * (0.4 + 0.1 * u(rng));
      const double peak = 150 + 20 * u(rng);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const double dx = (x - cx) / rx, dy = (y - cy) / ry;
          const double r2 = dx * dx + dy * dy;
          const double v = r2 < 1 ? 20 + peak * (1 - r2 * r2) : 20;
          img.at(x, y) = clamp_level(v + noise(rng));
        }
      break;
    }
    case Modality::Bone: {
      // mid-gray with periodic trabecular bars
      std::normal_distribution<double> noise(0.0, 4.0);
      const double period = 10 + 6 * u(rng), base = 120 + 15 * u(rng), amp = 30 + 10 * u(rng);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const double v = base + amp * std::sin(x / period) * std::sin(y / (period * 1.7));
          img.at(x, y) = clamp_level(v + noise(rng));
        }
      break;
    }
    case Modality::Cardiac: {
      // bright noisy field with a darker ring
      std::normal_distribution<double> noise(0.0, 8.0);
      const double cx = W * (0.4 + 0.2 * u(rng)), cy = H * (0.4 + 0.2 * u(rng));
      const double radius = std::min(W, H) * (0.25 + 0.1 * u(rng));
      const double base = 190 + 15 * u(rng);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const double d = std::hypot(x - cx, y - cy) - radius;
          const double v = base - 60 * std::exp(-d * d / 40.0);
          img.at(x, y) = clamp_level(v + noise(rng));
        }
      break;
    }
  }
  return img;
}

}  // namespace dewm::synth
