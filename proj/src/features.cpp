#include "dewm/features.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "dewm/error.hpp"

namespace dewm {

namespace {

using boost::multiprecision::cpp_int;
__extension__ typedef unsigned __int128 u128;

struct Offset {
  int dx;
  int dy;
};

// 0, 45, 90 and 135 degrees at distance 1.
constexpr std::array<Offset, 4> kOffsets{{{1, 0}, {1, -1}, {0, 1}, {1, 1}}};

std::size_t quantize(std::uint8_t level) { return static_cast<std::size_t>(level) * kGrayBins / 256; }

void require_nonempty(const GrayImage& img) {
  if (img.empty()) throw Error(ErrorCode::EmptyImage, "image has no pixels");
}

cpp_int to_cpp_int(u128 v) {
  cpp_int out = static_cast<std::uint64_t>(v >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(v);
  return out;
}

cpp_int binomial(int n, int k) {
  cpp_int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::array<double, FeatureVector::kSize> FeatureVector::to_array() const {
  return {diff_variance, diff_entropy,  mean,          std_dev,       skewness,
          kurtosis,      moment_mean_1, moment_mean_2, moment_mean_3, moment_mean_4};
}

FeatureVector FeatureVector::from_array(const std::array<double, kSize>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

CooccurrenceMatrix cooccurrence(const GrayImage& img) {
  require_nonempty(img);
  CooccurrenceMatrix out;
  const auto w = static_cast<long>(img.width());
  const auto h = static_cast<long>(img.height());
  std::size_t used_offsets = 0;
  std::vector<std::uint64_t> counts(kGrayBins * kGrayBins);
  for (const Offset off : kOffsets) {
    std::fill(counts.begin(), counts.end(), 0);
    std::uint64_t total = 0;
    for (long y = 0; y < h; ++y) {
      const long ny = y + off.dy;
      if (ny < 0 || ny >= h) continue;
      for (long x = 0; x < w; ++x) {
        const long nx = x + off.dx;
        if (nx < 0 || nx >= w) continue;
        const std::size_t a = quantize(img.at(x, y));
        const std::size_t b = quantize(img.at(nx, ny));
        ++counts[a * kGrayBins + b];
        ++counts[b * kGrayBins + a];
        total += 2;
      }
    }
    if (total == 0) continue;
    ++used_offsets;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      out.p[i] += static_cast<double>(counts[i]) / static_cast<double>(total);
    }
  }
  if (used_offsets == 0) {
    const std::size_t k = quantize(img.pixels()[0]);
    out.p[k * kGrayBins + k] = 1.0;
    return out;
  }
  for (double& v : out.p) v /= static_cast<double>(used_offsets);
  return out;
}

std::array<double, kGrayBins> difference_distribution(const CooccurrenceMatrix& m) {
  std::array<double, kGrayBins> pd{};
  for (std::size_t i = 0; i < kGrayBins; ++i) {
    for (std::size_t j = 0; j < kGrayBins; ++j) {
      pd[i > j ? i - j : j - i] += m.at(i, j);
    }
  }
  return pd;
}

double difference_entropy(const CooccurrenceMatrix& m) {
  double entropy = 0;
  for (const double p : difference_distribution(m)) {
    if (p > 0) entropy -= p * std::log2(p);
  }
  return entropy;
}

double difference_variance(const CooccurrenceMatrix& m) {
  const auto pd = difference_distribution(m);
  double mu = 0;
  for (std::size_t k = 0; k < pd.size(); ++k) mu += static_cast<double>(k) * pd[k];
  double var = 0;
  for (std::size_t k = 0; k < pd.size(); ++k) {
    const double d = static_cast<double>(k) - mu;
    var += d * d * pd[k];
  }
  return var;
}

GrayMoments gray_moments(const GrayImage& img) {
  require_nonempty(img);
  std::array<std::uint64_t, 256> hist{};
  std::uint64_t sum = 0;
  for (const std::uint8_t v : img.pixels()) {
    ++hist[v];
    sum += v;
  }
  const auto n = static_cast<double>(img.size());
  GrayMoments out;
  out.mean = static_cast<double>(sum) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (std::size_t v = 0; v < hist.size(); ++v) {
    if (hist[v] == 0) continue;
    const double d = static_cast<double>(v) - out.mean;
    const double c = static_cast<double>(hist[v]);
    m2 += c * d * d;
    m3 += c * d * d * d;
    m4 += c * d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  out.std_dev = std::sqrt(m2);
  if (m2 > 0) {
    out.skewness = m3 / (m2 * out.std_dev);
    out.kurtosis = m4 / (m2 * m2);
  }
  return out;
}

std::array<double, 4> moment_means(const GrayImage& img) {
  require_nonempty(img);
  // raw[i][j] = sum x^i y^j I(x, y) for i + j <= 4, exact.
  std::array<std::array<u128, 5>, 5> raw{};
  for (std::size_t y = 0; y < img.height(); ++y) {
    std::array<u128, 5> row{};
    for (std::size_t x = 0; x < img.width(); ++x) {
      const u128 v = img.at(x, y);
      if (v == 0) continue;
      u128 xp = 1;
      for (int i = 0; i <= 4; ++i) {
        row[i] += xp * v;
        xp *= x;
      }
    }
    u128 yp = 1;
    for (int j = 0; j <= 4; ++j) {
      for (int i = 0; i + j <= 4; ++i) raw[i][j] += row[i] * yp;
      yp *= y;
    }
  }
  if (raw[0][0] == 0) throw Error(ErrorCode::ZeroIntensity, "image has zero total intensity");

  std::array<std::array<cpp_int, 5>, 5> m;
  for (int i = 0; i <= 4; ++i) {
    for (int j = 0; i + j <= 4; ++j) m[i][j] = to_cpp_int(raw[i][j]);
  }
  const cpp_int& s = m[0][0];
  const cpp_int neg_a = -m[1][0];
  const cpp_int neg_b = -m[0][1];
  const long double s_ld = s.convert_to<long double>();

  // s^(p+q) * mu_pq as an exact integer.
  const auto scaled_central = [&](int p, int q) {
    cpp_int total = 0;
    for (int i = 0; i <= p; ++i) {
      for (int j = 0; j <= q; ++j) {
        total += binomial(p, i) * binomial(q, j) * pow(neg_a, p - i) * pow(neg_b, q - j) *
                 pow(s, i + j) * m[i][j];
      }
    }
    return total;
  };

  std::array<double, 4> out{};
  for (int n = 1; n <= 4; ++n) {
    // eta_pq = mu_pq / s^(1 + n/2), and mu_pq carries an extra s^n.
    const long double denom = std::pow(s_ld, static_cast<long double>(n) * 1.5L + 1.0L);
    long double acc = 0;
    for (int p = n; p >= 0; --p) {
      acc += scaled_central(p, n - p).convert_to<long double>() / denom;
    }
    out[static_cast<std::size_t>(n - 1)] = static_cast<double>(acc / (n + 1));
  }
  return out;
}

FeatureVector extract_features(const GrayImage& img) {
  const CooccurrenceMatrix glcm = cooccurrence(img);
  const GrayMoments g = gray_moments(img);
  const auto mm = moment_means(img);
  FeatureVector f;
  f.diff_variance = difference_variance(glcm);
  f.diff_entropy = difference_entropy(glcm);
  f.mean = g.mean;
  f.std_dev = g.std_dev;
  f.skewness = g.skewness;
  f.kurtosis = g.kurtosis;
  f.moment_mean_1 = mm[0];
  f.moment_mean_2 = mm[1];
  f.moment_mean_3 = mm[2];
  f.moment_mean_4 = mm[3];
  return f;
}

}  // namespace dewm
