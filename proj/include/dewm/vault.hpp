#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dewm/error.hpp"
#include "dewm/features.hpp"
#include "dewm/image.hpp"
#include "dewm/payload.hpp"
#include "dewm/watermark.hpp"

namespace dewm {

enum class RecordStatus { Watermarked, LinkBroken, Unverified };

std::string to_string(RecordStatus status);
/// Throws Error(Format) on an unknown name.
RecordStatus status_from_string(const std::string& name);

struct VaultRecord {
  std::string patient_code;
  std::string locator;     // where the original lives outside the vault
  std::string image_file;  // file name under <vault>/images
  RecordStatus status = RecordStatus::Watermarked;
  /// Dequantized copy of the embedded features; optional.
  std::optional<FeatureVector> features;

  bool operator==(const VaultRecord&) const = default;
};

inline constexpr int kManifestVersion = 1;

struct VaultManifest {
  int version = kManifestVersion;
  std::vector<VaultRecord> records;

  bool operator==(const VaultManifest&) const = default;
};

std::string manifest_to_json(const VaultManifest& manifest);
/// Throws Error(Format) on malformed JSON, a schema violation or a
/// duplicate (patient_code, image_file) pair.
VaultManifest manifest_from_json(const std::string& text);

VaultManifest read_manifest(const std::filesystem::path& path);

/// Writes `<path>.tmp`, flushes it, then renames it over `path`.
/// `before_rename` runs between the two steps; if it throws, the temporary
/// file is removed and `path` keeps its previous content.
void write_manifest_atomic(const std::filesystem::path& path, const VaultManifest& manifest,
                           const std::function<void()>& before_rename = {});

/// Per-image entry of a code map: which patient and external path an image
/// in the source directory belongs to.
struct CodeEntry {
  std::string patient_code;
  std::string locator;
};

/// Keyed by source file name.
using CodeMap = std::map<std::string, CodeEntry>;

/// Lines of `file_name,patient_code,locator`; blank lines and lines starting
/// with '#' are ignored. The locator may contain commas.
CodeMap read_code_map(const std::filesystem::path& path);

struct ImageIssue {
  std::string file;
  ErrorCode code;
  std::string message;
};

struct BatchSummary {
  std::size_t watermarked = 0;
  std::size_t skipped = 0;  // InsufficientCapacity
  std::size_t failed = 0;
  std::vector<ImageIssue> issues;
};

struct RepairSummary {
  std::size_t repaired = 0;   // records whose fields or status changed
  std::size_t unchanged = 0;
  std::size_t unverified = 0;
};

struct LoadedRecord {
  VaultRecord record;
  GrayImage restored;
  std::optional<Payload> payload;
  bool verified = false;
  std::string diagnostic;
};

/// On-disk image store: <dir>/manifest.json plus <dir>/images/*.pgm.
/// A Vault object is the single writer of its manifest.
class Vault {
 public:
  /// Creates the directory layout and an empty manifest. Throws Error(Io)
  /// if a manifest already exists.
  static Vault init(const std::filesystem::path& dir);
  static Vault open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::filesystem::path manifest_path() const { return dir_ / "manifest.json"; }
  std::filesystem::path images_dir() const { return dir_ / "images"; }
  std::filesystem::path image_path(const VaultRecord& record) const {
    return images_dir() / record.image_file;
  }

  const VaultManifest& manifest() const noexcept { return manifest_; }
  VaultManifest& manifest() noexcept { return manifest_; }

  /// Watermarks `original` (hash and features computed on it), stores it as
  /// images/<image_file> and appends a record. Does not save the manifest.
  EmbedReport add(const GrayImage& original, const std::string& patient_code,
                  const std::string& locator, const std::string& image_file);

  /// Offline batch watermarking of every *.pgm in src_dir, in file-name
  /// order. Images absent from code_map get their file stem as patient code
  /// and their source path as locator. Per-image failures are collected and
  /// the batch continues. Saves the manifest once at the end.
  BatchSummary watermark_all(const std::filesystem::path& src_dir, const CodeMap& code_map,
                             unsigned threads = 0);

  /// Re-derives each record's locator and patient code from its embedded
  /// payload. Records that fail verification become Unverified and keep
  /// their locator. Saves the manifest atomically.
  RepairSummary repair_links();

  /// Extracts the first record with this patient code.
  /// Throws Error(UnknownCode).
  LoadedRecord load_record(const std::string& patient_code) const;

  LoadedRecord load(std::size_t record_index) const;

  void save() const;

 private:
  explicit Vault(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path dir_;
  VaultManifest manifest_;
};

}  // namespace dewm
