#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dewm/features.hpp"
#include "dewm/vault.hpp"

namespace dewm {

struct Hit {
  std::size_t record = 0;  // index into the manifest
  double distance = 0;
  bool verified = false;
};

/// Hits in non-decreasing distance; equal distances keep manifest order.
struct QueryResult {
  std::vector<Hit> hits;
};

struct IndexOptions {
  /// Take features from the manifest cache instead of extracting each
  /// image. Cached records are not re-authenticated.
  bool use_feature_cache = false;
};

/// Searchable snapshot of a vault: the embedded features of every record,
/// extracted and authenticated once.
class VaultIndex {
 public:
  struct Entry {
    std::size_t record = 0;
    std::optional<FeatureVector> features;  // absent if the payload was unreadable
    bool verified = false;
  };

  static VaultIndex build(const Vault& vault, IndexOptions options = {});

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const VaultManifest& manifest() const noexcept { return manifest_; }

 private:
  VaultManifest manifest_;
  std::vector<Entry> entries_;
};

/// Every record with this code, each authenticated. Throws Error(UnknownCode).
QueryResult search_by_code(const Vault& vault, const std::string& patient_code);

enum class DistanceMode {
  Euclidean,
  /// Components standardized by the vault's per-component mean and std.
  ZScoreEuclidean,
};

/// The D records nearest to the query image's features. Records whose
/// payload is unreadable are not ranked. Throws Error(EmptyVault).
QueryResult search_by_features(const VaultIndex& index, const GrayImage& query, std::size_t D,
                               DistanceMode mode = DistanceMode::Euclidean);

/// Same ranking for a precomputed feature vector.
QueryResult search_by_features(const VaultIndex& index, const FeatureVector& query, std::size_t D,
                               DistanceMode mode = DistanceMode::Euclidean);

struct PRPoint {
  std::string class_name;
  std::size_t D = 0;
  double recall = 0;
  double precision = 0;

  bool operator==(const PRPoint&) const = default;
};

/// image_file -> class name.
using ClassLabels = std::map<std::string, std::string>;

/// Lines of `image_file,class`; '#' comments and blank lines ignored.
ClassLabels read_class_labels(const std::filesystem::path& path);

struct EvalOptions {
  std::uint64_t seed = 0;
  std::size_t queries_per_class = 5;
  DistanceMode mode = DistanceMode::Euclidean;
};

inline constexpr std::size_t kDefaultCutoffs[] = {1, 5, 10, 20, 40};

/// Mean precision/recall per class over randomly drawn member queries. The
/// query image is the restored original of the chosen record. Classes are
/// reported in name order, cutoffs in the given order.
/// Throws Error(UnknownLabel) if a ranked record has no label or a label
/// names a file that is not in the vault.
std::vector<PRPoint> precision_recall(const Vault& vault, const VaultIndex& index,
                                      const ClassLabels& labels,
                                      std::span<const std::size_t> cutoffs,
                                      const EvalOptions& options = {});

/// CSV with header `class,D,recall,precision`; reals use the shortest
/// representation that round-trips.
std::string pr_graph_export(std::span<const PRPoint> points);
/// Throws Error(Format).
std::vector<PRPoint> parse_pr_csv(std::string_view csv);

}  // namespace dewm
