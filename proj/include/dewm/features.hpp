#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "dewm/image.hpp"

namespace dewm {

/// Ten image descriptors in their fixed wire order.
struct FeatureVector {
  double diff_variance = 0;
  double diff_entropy = 0;
  double mean = 0;
  double std_dev = 0;
  double skewness = 0;
  double kurtosis = 0;
  double moment_mean_1 = 0;
  double moment_mean_2 = 0;
  double moment_mean_3 = 0;
  double moment_mean_4 = 0;

  static constexpr std::size_t kSize = 10;

  std::array<double, kSize> to_array() const;
  static FeatureVector from_array(const std::array<double, kSize>& values);

  bool operator==(const FeatureVector&) const = default;
};

/// Number of quantized gray levels in the co-occurrence matrix.
inline constexpr std::size_t kGrayBins = 64;

/// Normalized, symmetric gray-level co-occurrence matrix over kGrayBins bins.
struct CooccurrenceMatrix {
  std::vector<double> p = std::vector<double>(kGrayBins * kGrayBins, 0.0);

  double at(std::size_t i, std::size_t j) const { return p[i * kGrayBins + j]; }
};

/// Levels are quantized as level * 64 / 256. Each of the four distance-1
/// offsets (0, 45, 90, 135 degrees) is counted in both directions and
/// normalized on its own; the matrix is the mean over offsets that have at
/// least one neighbor pair. A single-pixel image yields p(k,k) = 1.
/// Throws Error(EmptyImage).
CooccurrenceMatrix cooccurrence(const GrayImage& img);

/// p_diff(k) = sum over |i - j| = k of p(i, j), for k in [0, kGrayBins).
std::array<double, kGrayBins> difference_distribution(const CooccurrenceMatrix& m);

/// Shannon entropy (bits) of p_diff.
double difference_entropy(const CooccurrenceMatrix& m);
/// Variance of k under p_diff.
double difference_variance(const CooccurrenceMatrix& m);

struct GrayMoments {
  double mean = 0;
  double std_dev = 0;
  double skewness = 0;
  double kurtosis = 0;
};

/// Population statistics of raw gray levels; skewness and kurtosis are 0
/// for a constant image. Throws Error(EmptyImage).
GrayMoments gray_moments(const GrayImage& img);

/// Mean of the normalized central moments eta_pq for p + q = n, n = 1..4.
/// Central moments are accumulated exactly, so m1 is exactly zero.
/// Throws Error(EmptyImage) or Error(ZeroIntensity).
std::array<double, 4> moment_means(const GrayImage& img);

FeatureVector extract_features(const GrayImage& img);

}  // namespace dewm
