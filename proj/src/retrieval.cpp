#include "dewm/retrieval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "dewm/error.hpp"

namespace dewm {

namespace {

using Components = std::array<double, FeatureVector::kSize>;

struct Scaling {
  Components center{};
  Components scale{};
};

Scaling scaling_for(const VaultIndex& index, DistanceMode mode) {
  Scaling s;
  s.scale.fill(1.0);
  if (mode == DistanceMode::Euclidean) return s;
  std::size_t n = 0;
  Components sum{}, sum_sq{};
  for (const auto& e : index.entries()) {
    if (!e.features) continue;
    const Components v = e.features->to_array();
    for (std::size_t k = 0; k < v.size(); ++k) {
      sum[k] += v[k];
      sum_sq[k] += v[k] * v[k];
    }
    ++n;
  }
  if (n == 0) return s;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    s.center[k] = sum[k] / static_cast<double>(n);
    const double var = sum_sq[k] / static_cast<double>(n) - s.center[k] * s.center[k];
    s.scale[k] = var > 0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

double distance(const Components& a, const Components& b, const Scaling& s) {
  double sum = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = (a[k] - s.center[k]) / s.scale[k] - (b[k] - s.center[k]) / s.scale[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::Format, "bad number '" + std::string(text) + "' in CSV");
  }
  return value;
}

}  // namespace

VaultIndex VaultIndex::build(const Vault& vault, IndexOptions options) {
  VaultIndex index;
  index.manifest_ = vault.manifest();
  const auto& records = index.manifest_.records;
  index.entries_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    Entry entry{i, std::nullopt, false};
    if (options.use_feature_cache && records[i].features) {
      entry.features = records[i].features;
      entry.verified = records[i].status == RecordStatus::Watermarked;
    } else {
      const LoadedRecord loaded = vault.load(i);
      if (loaded.payload) entry.features = loaded.payload->features;
      entry.verified = loaded.verified;
    }
    index.entries_.push_back(entry);
  }
  return index;
}

QueryResult search_by_code(const Vault& vault, const std::string& patient_code) {
  QueryResult result;
  const auto& records = vault.manifest().records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].patient_code != patient_code) continue;
    result.hits.push_back({i, 0.0, vault.load(i).verified});
  }
  if (result.hits.empty()) {
    throw Error(ErrorCode::UnknownCode, "no record for patient code '" + patient_code + "'");
  }
  return result;
}

QueryResult search_by_features(const VaultIndex& index, const FeatureVector& query, std::size_t D,
                               DistanceMode mode) {
  const Scaling scaling = scaling_for(index, mode);
  const Components q = query.to_array();
  QueryResult result;
  for (const auto& e : index.entries()) {
    if (!e.features) continue;
    result.hits.push_back({e.record, distance(q, e.features->to_array(), scaling), e.verified});
  }
  if (result.hits.empty()) throw Error(ErrorCode::EmptyVault, "vault has no searchable records");
  std::stable_sort(result.hits.begin(), result.hits.end(),
                   [](const Hit& a, const Hit& b) { return a.distance < b.distance; });
  if (result.hits.size() > D) result.hits.resize(D);
  return result;
}

QueryResult search_by_features(const VaultIndex& index, const GrayImage& query, std::size_t D,
                               DistanceMode mode) {
  return search_by_features(index, extract_features(query), D, mode);
}

ClassLabels read_class_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  ClassLabels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorCode::Format,
                  path.string() + ":" + std::to_string(line_no) + ": expected image_file,class");
    }
    labels[std::string(fields[0])] = std::string(fields[1]);
  }
  return labels;
}

std::vector<PRPoint> precision_recall(const Vault& vault, const VaultIndex& index,
                                      const ClassLabels& labels,
                                      std::span<const std::size_t> cutoffs,
                                      const EvalOptions& options) {
  const auto& records = index.manifest().records;
  std::set<std::string> files;
  for (const VaultRecord& r : records) files.insert(r.image_file);
  for (const auto& [file, cls] : labels) {
    if (!files.count(file)) throw Error(ErrorCode::UnknownLabel, "label for unknown image " + file);
  }

  // class -> ranked record indices, in manifest order
  std::map<std::string, std::vector<std::size_t>> members;
  std::vector<const std::string*> class_of(records.size(), nullptr);
  std::size_t ranked = 0;
  for (const auto& e : index.entries()) {
    if (!e.features) continue;
    const auto it = labels.find(records[e.record].image_file);
    if (it == labels.end()) {
      throw Error(ErrorCode::UnknownLabel, "no class label for " + records[e.record].image_file);
    }
    members[it->second].push_back(e.record);
    class_of[e.record] = &it->second;
    ++ranked;
  }
  if (ranked == 0) throw Error(ErrorCode::EmptyVault, "vault has no searchable records");
  const std::size_t max_cutoff =
      cutoffs.empty() ? 0 : *std::max_element(cutoffs.begin(), cutoffs.end());

  std::mt19937_64 rng(options.seed);
  std::vector<PRPoint> points;
  for (auto& [cls, pool] : members) {
    // Partial Fisher-Yates on raw engine output keeps the draw identical
    // across standard library implementations.
    std::vector<std::size_t> candidates = pool;
    const std::size_t queries = std::min(options.queries_per_class, candidates.size());
    for (std::size_t i = 0; i < queries; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (candidates.size() - i));
      std::swap(candidates[i], candidates[j]);
    }

    std::vector<double> recall(cutoffs.size(), 0.0), precision(cutoffs.size(), 0.0);
    for (std::size_t q = 0; q < queries; ++q) {
      const GrayImage query = vault.load(candidates[q]).restored;
      const QueryResult result = search_by_features(index, query, max_cutoff, options.mode);
      for (std::size_t c = 0; c < cutoffs.size(); ++c) {
        const std::size_t top = std::min(cutoffs[c], result.hits.size());
        std::size_t relevant = 0;
        for (std::size_t k = 0; k < top; ++k) {
          if (*class_of[result.hits[k].record] == cls) ++relevant;
        }
        precision[c] += top ? static_cast<double>(relevant) / static_cast<double>(top) : 0.0;
        recall[c] += static_cast<double>(relevant) / static_cast<double>(pool.size());
      }
    }
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
      const double n = static_cast<double>(queries);
      points.push_back({cls, cutoffs[c], recall[c] / n, precision[c] / n});
    }
  }
  return points;
}

std::string pr_graph_export(std::span<const PRPoint> points) {
  std::string out = "class,D,recall,precision\n";
  for (const PRPoint& p : points) {
    out += p.class_name + "," + std::to_string(p.D) + "," + format_real(p.recall) + "," +
           format_real(p.precision) + "\n";
  }
  return out;
}

std::vector<PRPoint> parse_pr_csv(std::string_view csv) {
  std::vector<PRPoint> points;
  bool header = true;
  for (std::string_view line : split(csv, '\n')) {
    if (line.empty()) continue;
    if (header) {
      if (line != "class,D,recall,precision") throw Error(ErrorCode::Format, "unexpected CSV header");
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 4) throw Error(ErrorCode::Format, "expected 4 CSV columns");
    points.push_back({std::string(f[0]), parse_number<std::size_t>(f[1]),
                      parse_number<double>(f[2]), parse_number<double>(f[3])});
  }
  if (header) throw Error(ErrorCode::Format, "missing CSV header");
  return points;
}

}  // namespace dewm
