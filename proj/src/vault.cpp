#include "dewm/vault.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "dewm/error.hpp"

namespace dewm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(RecordStatus status) {
  switch (status) {
    case RecordStatus::Watermarked: return "watermarked";
    case RecordStatus::LinkBroken: return "link_broken";
    case RecordStatus::Unverified: return "unverified";
  }
  return "unknown";
}

RecordStatus status_from_string(const std::string& name) {
  if (name == "watermarked") return RecordStatus::Watermarked;
  if (name == "link_broken") return RecordStatus::LinkBroken;
  if (name == "unverified") return RecordStatus::Unverified;
  throw Error(ErrorCode::Format, "unknown record status '" + name + "'");
}

std::string manifest_to_json(const VaultManifest& manifest) {
  json records = json::array();
  for (const VaultRecord& r : manifest.records) {
    json j = {{"patient_code", r.patient_code},
              {"locator", r.locator},
              {"image_file", r.image_file},
              {"status", to_string(r.status)}};
    if (r.features) j["features"] = r.features->to_array();
    records.push_back(std::move(j));
  }
  const json doc = {{"version", manifest.version}, {"records", std::move(records)}};
  return doc.dump(2) + "\n";
}

VaultManifest manifest_from_json(const std::string& text) {
  VaultManifest manifest;
  try {
    const json doc = json::parse(text);
    manifest.version = doc.at("version").get<int>();
    if (manifest.version != kManifestVersion) {
      throw Error(ErrorCode::Format,
                  "unsupported manifest version " + std::to_string(manifest.version));
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const json& j : doc.at("records")) {
      VaultRecord r;
      r.patient_code = j.at("patient_code").get<std::string>();
      r.locator = j.at("locator").get<std::string>();
      r.image_file = j.at("image_file").get<std::string>();
      r.status = status_from_string(j.at("status").get<std::string>());
      if (j.contains("features")) {
        r.features = FeatureVector::from_array(
            j.at("features").get<std::array<double, FeatureVector::kSize>>());
      }
      if (r.image_file.empty() || fs::path(r.image_file).has_parent_path()) {
        throw Error(ErrorCode::Format, "invalid image_file '" + r.image_file + "'");
      }
      if (!seen.emplace(r.patient_code, r.image_file).second) {
        throw Error(ErrorCode::Format, "duplicate record for " + r.image_file);
      }
      manifest.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed manifest: ") + e.what());
  }
  return manifest;
}

VaultManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return manifest_from_json(text.str());
}

void write_manifest_atomic(const fs::path& path, const VaultManifest& manifest,
                           const std::function<void()>& before_rename) {
  const std::string text = manifest_to_json(manifest);
  fs::path tmp = path;
  tmp += ".tmp";

  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(ErrorCode::Io, "cannot create " + tmp.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < text.size()) {
    const ssize_t n = ::write(fd, text.data() + written, text.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fs::remove(tmp);
      throw Error(ErrorCode::Io, "write to " + tmp.string() + " failed");
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) {
    fs::remove(tmp);
    throw Error(ErrorCode::Io, "fsync of " + tmp.string() + " failed");
  }

  try {
    if (before_rename) before_rename();
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot replace " + path.string());
  }
}

CodeMap read_code_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  CodeMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw Error(ErrorCode::Format,
                  path.string() + ":" + std::to_string(line_no) + ": expected file,code,locator");
    }
    CodeEntry entry{line.substr(c1 + 1, c2 - c1 - 1), line.substr(c2 + 1)};
    if (entry.patient_code.empty()) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(line_no) + ": empty patient code");
    }
    map[line.substr(0, c1)] = std::move(entry);
  }
  return map;
}

Vault Vault::init(const fs::path& dir) {
  Vault vault(dir);
  if (fs::exists(vault.manifest_path())) {
    throw Error(ErrorCode::Io, "vault already initialized at " + dir.string());
  }
  fs::create_directories(vault.images_dir());
  vault.save();
  return vault;
}

Vault Vault::open(const fs::path& dir) {
  Vault vault(dir);
  vault.manifest_ = read_manifest(vault.manifest_path());
  return vault;
}

void Vault::save() const { write_manifest_atomic(manifest_path(), manifest_); }

namespace {

struct Prepared {
  VaultRecord record;
  EmbedResult embedded;
};

Prepared prepare(const GrayImage& original, const std::string& patient_code,
                 const std::string& locator, const std::string& image_file) {
  if (patient_code.empty()) throw Error(ErrorCode::Format, "empty patient code");
  Payload payload;
  payload.hash = compute_image_hash(original);
  payload.locator = locator;
  payload.features = extract_features(original);
  payload.patient_code = patient_code;
  Prepared out{{patient_code, locator, image_file, RecordStatus::Watermarked,
                quantize_features(payload.features)},
               embed(original, payload)};
  return out;
}

}  // namespace

EmbedReport Vault::add(const GrayImage& original, const std::string& patient_code,
                       const std::string& locator, const std::string& image_file) {
  if (image_file.empty() || fs::path(image_file).has_parent_path()) {
    throw Error(ErrorCode::Format, "invalid image file name '" + image_file + "'");
  }
  for (const VaultRecord& r : manifest_.records) {
    if (r.image_file == image_file) {
      throw Error(ErrorCode::DuplicateRecord, image_file + " is already in the vault");
    }
  }
  Prepared prepared = prepare(original, patient_code, locator, image_file);
  fs::create_directories(images_dir());
  write_pgm(images_dir() / image_file, prepared.embedded.image);
  manifest_.records.push_back(std::move(prepared.record));
  return prepared.embedded.report;
}

BatchSummary Vault::watermark_all(const fs::path& src_dir, const CodeMap& code_map,
                                  unsigned threads) {
  std::vector<fs::path> sources;
  if (!fs::is_directory(src_dir)) throw Error(ErrorCode::Io, src_dir.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(src_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") sources.push_back(entry.path());
  }
  std::sort(sources.begin(), sources.end());

  std::set<std::string> taken;
  for (const VaultRecord& r : manifest_.records) taken.insert(r.image_file);

  struct Outcome {
    std::optional<VaultRecord> record;
    std::optional<ImageIssue> issue;
  };
  std::vector<Outcome> outcomes(sources.size());
  fs::create_directories(images_dir());

  const auto work = [&](std::size_t i) {
    const fs::path& src = sources[i];
    const std::string file = src.filename().string();
    const std::string image_file = src.stem().string() + ".pgm";
    try {
      if (taken.count(image_file)) {
        throw Error(ErrorCode::DuplicateRecord, image_file + " is already in the vault");
      }
      const auto it = code_map.find(file);
      const CodeEntry entry =
          it != code_map.end() ? it->second : CodeEntry{src.stem().string(), src.string()};
      Prepared prepared = prepare(read_pgm(src), entry.patient_code, entry.locator, image_file);
      write_pgm(images_dir() / image_file, prepared.embedded.image);
      outcomes[i].record = std::move(prepared.record);
    } catch (const Error& e) {
      outcomes[i].issue = ImageIssue{file, e.code(), e.what()};
    } catch (const std::exception& e) {
      outcomes[i].issue = ImageIssue{file, ErrorCode::Io, e.what()};
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(sources.size(), 1)));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < sources.size(); i = next++) work(i);
      });
    }
  }

  BatchSummary summary;
  for (Outcome& o : outcomes) {
    if (o.record) {
      manifest_.records.push_back(std::move(*o.record));
      ++summary.watermarked;
    } else {
      if (o.issue->code == ErrorCode::InsufficientCapacity) ++summary.skipped;
      else ++summary.failed;
      summary.issues.push_back(std::move(*o.issue));
    }
  }
  save();
  return summary;
}

LoadedRecord Vault::load(std::size_t record_index) const {
  LoadedRecord out;
  out.record = manifest_.records.at(record_index);
  GrayImage watermarked;
  try {
    watermarked = read_pgm(image_path(out.record));
  } catch (const Error& e) {
    out.diagnostic = e.what();
    return out;
  }
  ExtractResult extracted = extract(watermarked);
  out.restored = std::move(extracted.restored);
  out.payload = std::move(extracted.payload);
  out.verified = extracted.verified;
  out.diagnostic = std::move(extracted.diagnostic);
  return out;
}

LoadedRecord Vault::load_record(const std::string& patient_code) const {
  for (std::size_t i = 0; i < manifest_.records.size(); ++i) {
    if (manifest_.records[i].patient_code == patient_code) return load(i);
  }
  throw Error(ErrorCode::UnknownCode, "no record for patient code '" + patient_code + "'");
}

RepairSummary Vault::repair_links() {
  RepairSummary summary;
  for (std::size_t i = 0; i < manifest_.records.size(); ++i) {
    VaultRecord& record = manifest_.records[i];
    const LoadedRecord loaded = load(i);
    if (!loaded.verified || !loaded.payload) {
      record.status = RecordStatus::Unverified;
      ++summary.unverified;
      continue;
    }
    VaultRecord updated = record;
    updated.locator = loaded.payload->locator;
    updated.patient_code = loaded.payload->patient_code;
    updated.status = RecordStatus::Watermarked;
    if (updated == record) {
      ++summary.unchanged;
    } else {
      record = std::move(updated);
      ++summary.repaired;
    }
  }
  save();
  return summary;
}

}  // namespace dewm
