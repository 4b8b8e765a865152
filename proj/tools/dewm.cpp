// dewm: reversible watermarking and authenticated retrieval for grayscale
// PGM images.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dewm/error.hpp"
#include "dewm/features.hpp"
#include "dewm/payload.hpp"
#include "dewm/retrieval.hpp"
#include "dewm/vault.hpp"
#include "dewm/watermark.hpp"

namespace {

using namespace dewm;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUnverified = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNotFound = 4;
constexpr int kExitFormat = 5;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientCapacity:
      return kExitCapacity;
    case ErrorCode::UnknownCode:
    case ErrorCode::UnknownLabel:
    case ErrorCode::EmptyVault:
      return kExitNotFound;
    case ErrorCode::Format:
    case ErrorCode::CorruptMap:
    case ErrorCode::BadMagic:
    case ErrorCode::BadVersion:
    case ErrorCode::CrcMismatch:
    case ErrorCode::MalformedPayload:
      return kExitFormat;
    default:
      return kExitOther;
  }
}

std::string format_db(double db) {
  if (std::isinf(db)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", db);
  return buf;
}

std::string format_feature(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

constexpr const char* kFeatureNames[FeatureVector::kSize] = {
    "diff_variance", "diff_entropy",  "mean",          "std_dev",       "skewness",
    "kurtosis",      "moment_mean_1", "moment_mean_2", "moment_mean_3", "moment_mean_4"};

std::string feature_lines(const FeatureVector& f) {
  std::string out;
  const auto values = f.to_array();
  for (std::size_t k = 0; k < values.size(); ++k) {
    out += std::string(kFeatureNames[k]) + ": " + format_feature(values[k]) + "\n";
  }
  return out;
}

std::string payload_dump(const Payload& p) {
  return "hash: " + to_hex(p.hash) + "\nlocator: " + p.locator + "\npatient_code: " + p.patient_code +
         "\n" + feature_lines(p.features);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "short write to " + path);
}

std::string report_lines(const EmbedReport& r) {
  std::ostringstream s;
  s << "capacity_bits: " << r.capacity_bits << "\n"
    << "used_bits: " << r.used_bits << "\n"
    << "expanded_pairs: " << r.expanded_pairs << "\n"
    << "changeable_pairs: " << r.changeable_pairs << "\n"
    << "psnr_db: " << format_db(r.psnr_db) << "\n";
  return s.str();
}

// Shared tail of extract / verify / vault load.
int report_extraction(const GrayImage& restored, const std::optional<Payload>& payload,
                      bool verified, const std::string& diagnostic,
                      const std::string& restored_out, const std::string& payload_out) {
  if (!restored_out.empty()) write_pgm(restored_out, restored);
  if (payload && !payload_out.empty()) write_text(payload_out, payload_dump(*payload));
  std::cout << "verified: " << (verified ? "true" : "false") << "\n";
  if (!diagnostic.empty()) std::cout << "diagnostic: " << diagnostic << "\n";
  if (payload && payload_out.empty()) std::cout << payload_dump(*payload);
  return verified ? kExitOk : kExitUnverified;
}

std::vector<std::size_t> parse_cutoffs(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size() || v == 0) {
      throw CLI::ValidationError("--D", "expected a comma list of positive integers");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--D", "empty cutoff list");
  return out;
}

void print_hits(const Vault& vault, const QueryResult& result) {
  std::size_t rank = 0;
  for (const Hit& h : result.hits) {
    const VaultRecord& r = vault.manifest().records[h.record];
    std::cout << ++rank << "\t" << r.image_file << "\t" << r.patient_code << "\t"
              << format_feature(h.distance) << "\t" << (h.verified ? "verified" : "UNVERIFIED")
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reversible difference-expansion watermarking and image vault"};
  app.require_subcommand(1);
  int rc = kExitOk;

  // embed
  std::string in_path, out_path, code, locator;
  auto* embed_cmd = app.add_subcommand("embed", "Watermark an image with hash, locator, features and patient code");
  embed_cmd->add_option("image", in_path, "Input PGM")->required();
  embed_cmd->add_option("-o,--output", out_path, "Watermarked PGM")->required();
  embed_cmd->add_option("--code", code, "Patient code")->required();
  embed_cmd->add_option("--locator", locator, "External file locator (defaults to the input path)");
  embed_cmd->callback([&] {
    const GrayImage original = read_pgm(in_path);
    Payload p;
    p.hash = compute_image_hash(original);
    p.locator = locator.empty() ? in_path : locator;
    p.features = extract_features(original);
    p.patient_code = code;
    const EmbedResult r = embed(original, p);
    write_pgm(out_path, r.image);
    std::cout << report_lines(r.report);
  });

  // extract / verify
  std::string restored_out, payload_out;
  auto* extract_cmd = app.add_subcommand("extract", "Restore the original image and dump the payload");
  extract_cmd->add_option("image", in_path, "Watermarked PGM")->required();
  extract_cmd->add_option("--restored", restored_out, "Where to write the restored PGM");
  extract_cmd->add_option("--payload", payload_out, "Where to write the payload dump");
  extract_cmd->callback([&] {
    const ExtractResult x = extract(read_pgm(in_path));
    rc = report_extraction(x.restored, x.payload, x.verified, x.diagnostic, restored_out, payload_out);
  });

  auto* verify_cmd = app.add_subcommand("verify", "Check a watermarked image's integrity");
  verify_cmd->add_option("image", in_path, "Watermarked PGM")->required();
  verify_cmd->callback([&] {
    const ExtractResult x = extract(read_pgm(in_path));
    std::cout << "verified: " << (x.verified ? "true" : "false") << "\n";
    if (!x.diagnostic.empty()) std::cout << "diagnostic: " << x.diagnostic << "\n";
    rc = x.verified ? kExitOk : kExitUnverified;
  });

  auto* features_cmd = app.add_subcommand("features", "Print the ten image descriptors");
  features_cmd->add_option("image", in_path, "PGM image")->required();
  features_cmd->callback([&] { std::cout << feature_lines(extract_features(read_pgm(in_path))); });

  std::string other_path;
  auto* psnr_cmd = app.add_subcommand("psnr", "PSNR between two images");
  psnr_cmd->add_option("a", in_path, "First PGM")->required();
  psnr_cmd->add_option("b", other_path, "Second PGM")->required();
  psnr_cmd->callback([&] {
    std::cout << "psnr_db: " << format_db(psnr(read_pgm(in_path), read_pgm(other_path))) << "\n";
  });

  // vault
  std::string vault_dir, src_dir, codes_path, labels_path, query_path, name, cutoffs = "1,5,10,20,40";
  unsigned threads = 0;
  std::uint64_t seed = 0;
  std::size_t top = 10, queries = 5;
  bool zscore = false, use_cache = false;
  auto* vault_cmd = app.add_subcommand("vault", "Watermarked image vault");
  vault_cmd->require_subcommand(1);

  auto* init_cmd = vault_cmd->add_subcommand("init", "Create an empty vault");
  init_cmd->add_option("dir", vault_dir)->required();
  init_cmd->callback([&] {
    Vault::init(vault_dir);
    std::cout << "initialized " << vault_dir << "\n";
  });

  auto* add_cmd = vault_cmd->add_subcommand("add", "Watermark one image into the vault");
  add_cmd->add_option("dir", vault_dir)->required();
  add_cmd->add_option("image", in_path)->required();
  add_cmd->add_option("--code", code, "Patient code")->required();
  add_cmd->add_option("--locator", locator, "External locator (defaults to the image path)");
  add_cmd->add_option("--name", name, "Stored file name (defaults to the input file name)");
  add_cmd->callback([&] {
    Vault v = Vault::open(vault_dir);
    const std::filesystem::path src(in_path);
    const EmbedReport r = v.add(read_pgm(src), code, locator.empty() ? in_path : locator,
                                name.empty() ? src.stem().string() + ".pgm" : name);
    v.save();
    std::cout << report_lines(r);
  });

  auto* all_cmd = vault_cmd->add_subcommand("watermark-all", "Offline watermarking of a directory of PGM images");
  all_cmd->add_option("dir", vault_dir)->required();
  all_cmd->add_option("src", src_dir, "Directory of source PGM images")->required();
  all_cmd->add_option("--codes", codes_path, "CSV lines: file,patient_code,locator");
  all_cmd->add_option("--threads", threads, "Worker threads (0 = hardware)");
  all_cmd->callback([&] {
    Vault v = Vault::open(vault_dir);
    const CodeMap codes = codes_path.empty() ? CodeMap{} : read_code_map(codes_path);
    const BatchSummary s = v.watermark_all(src_dir, codes, threads);
    for (const ImageIssue& issue : s.issues) {
      std::cerr << issue.file << ": " << to_string(issue.code) << ": " << issue.message << "\n";
    }
    std::cout << "watermarked: " << s.watermarked << "\nskipped: " << s.skipped
              << "\nfailed: " << s.failed << "\n";
    rc = s.failed ? kExitOther : s.skipped ? kExitCapacity : kExitOk;
  });

  auto* repair_cmd = vault_cmd->add_subcommand("repair", "Rebuild locators and patient codes from the watermarks");
  repair_cmd->add_option("dir", vault_dir)->required();
  repair_cmd->callback([&] {
    Vault v = Vault::open(vault_dir);
    const RepairSummary s = v.repair_links();
    std::cout << "repaired: " << s.repaired << "\nunchanged: " << s.unchanged
              << "\nunverified: " << s.unverified << "\n";
    rc = s.unverified ? kExitUnverified : kExitOk;
  });

  auto* load_cmd = vault_cmd->add_subcommand("load", "Extract the record of a patient");
  load_cmd->add_option("dir", vault_dir)->required();
  load_cmd->add_option("--code", code, "Patient code")->required();
  load_cmd->add_option("--restored", restored_out, "Where to write the restored PGM");
  load_cmd->add_option("--payload", payload_out, "Where to write the payload dump");
  load_cmd->callback([&] {
    const Vault v = Vault::open(vault_dir);
    const LoadedRecord r = v.load_record(code);
    std::cout << "image_file: " << r.record.image_file << "\n";
    rc = report_extraction(r.restored, r.payload, r.verified, r.diagnostic, restored_out, payload_out);
  });

  auto* search_cmd = vault_cmd->add_subcommand("search", "Query by patient code or by example image");
  search_cmd->add_option("dir", vault_dir)->required();
  auto* by_code = search_cmd->add_option("--code", code, "Patient code");
  auto* by_image = search_cmd->add_option("--image", query_path, "Query PGM");
  by_code->excludes(by_image);
  search_cmd->add_option("--D", top, "Number of images to retrieve")->check(CLI::PositiveNumber);
  search_cmd->add_flag("--zscore", zscore, "Standardize feature components before ranking");
  search_cmd->add_flag("--use-cache", use_cache, "Use the manifest feature cache");
  search_cmd->callback([&] {
    const Vault v = Vault::open(vault_dir);
    if (!code.empty()) {
      print_hits(v, search_by_code(v, code));
    } else if (!query_path.empty()) {
      const VaultIndex index = VaultIndex::build(v, {.use_feature_cache = use_cache});
      print_hits(v, search_by_features(index, read_pgm(query_path), top,
                                       zscore ? DistanceMode::ZScoreEuclidean : DistanceMode::Euclidean));
    } else {
      throw CLI::ValidationError("search", "one of --code or --image is required");
    }
  });

  auto* eval_cmd = vault_cmd->add_subcommand("eval", "Precision/recall of feature search per class");
  eval_cmd->add_option("dir", vault_dir)->required();
  eval_cmd->add_option("--labels", labels_path, "CSV lines: image_file,class")->required();
  eval_cmd->add_option("--seed", seed, "Query selection seed");
  eval_cmd->add_option("--D", cutoffs, "Comma list of retrieval cutoffs");
  eval_cmd->add_option("--queries", queries, "Random queries per class")->check(CLI::PositiveNumber);
  eval_cmd->add_option("-o,--output", out_path, "CSV output (default stdout)");
  eval_cmd->add_flag("--zscore", zscore, "Standardize feature components before ranking");
  eval_cmd->add_flag("--use-cache", use_cache, "Use the manifest feature cache");
  eval_cmd->callback([&] {
    const std::vector<std::size_t> d_list = parse_cutoffs(cutoffs);
    const Vault v = Vault::open(vault_dir);
    const VaultIndex index = VaultIndex::build(v, {.use_feature_cache = use_cache});
    const EvalOptions options{seed, queries,
                              zscore ? DistanceMode::ZScoreEuclidean : DistanceMode::Euclidean};
    const std::string csv =
        pr_graph_export(precision_recall(v, index, read_class_labels(labels_path), d_list, options));
    if (out_path.empty()) std::cout << csv;
    else write_text(out_path, csv);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return rc;
}
