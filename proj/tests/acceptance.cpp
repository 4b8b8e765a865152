// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "dewm/features.hpp"
#include "dewm/image.hpp"
#include "dewm/payload.hpp"
#include "dewm/pixel_codec.hpp"
#include "dewm/retrieval.hpp"
#include "dewm/vault.hpp"
#include "dewm/watermark.hpp"
#include "oracle.hpp"
#include "support.hpp"

namespace {

using namespace dewm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. Random images with payloads up to capacity round-trip exactly.
Outcome reversibility() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> side(32, 256);
  std::uniform_real_distribution<double> sigma(0.3, 8.0);
  const auto t0 = Clock::now();
  std::size_t cases = 0, structured = 0, skipped = 0;
  for (std::uint64_t seed = 0; cases < 1000; ++seed) {
    const GrayImage img = seed % 7 == 6 ? synth::random_image(side(rng), side(rng), seed)
                                        : synth::smooth_texture(side(rng), side(rng), seed, sigma(rng));
    const std::size_t cap = capacity(img);
    if (cap == 0) {
      ++skipped;
      continue;
    }
    ++cases;
    // Full record whenever the minimum record fits; raw bits otherwise.
    const std::size_t room = cap / 8;
    if (room >= kPayloadBaseBytes && seed % 2 == 0) {
      const std::size_t spare = room - kPayloadBaseBytes;
      const std::size_t code_len = std::min<std::size_t>(rng() % 65, spare);
      const std::size_t loc_len = std::min<std::size_t>(rng() % 1025, spare - code_len);
      Payload p = synth::random_payload(rng, loc_len, code_len);
      p.hash = compute_image_hash(img);
      const ExtractResult x = extract(embed(img, p).image);
      ++structured;
      if (!x.verified || !x.payload || !(*x.payload == p) || !(x.restored == img)) {
        o.fail("payload mismatch at seed " + std::to_string(seed));
      }
    } else {
      std::uniform_int_distribution<std::size_t> len(0, cap);
      BitVector bits(seed % 5 == 0 ? cap : len(rng));
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
      const DecodedStream d = decode_stream(embed_bits(img, bits).image);
      const bool prefix = d.payload_bits.size() == cap &&
                          std::equal(bits.begin(), bits.end(), d.payload_bits.begin());
      if (!prefix || !(d.restored == img)) o.fail("bitstream mismatch at seed " + std::to_string(seed));
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 60.0) o.fail("took " + fmt("%.1f s", secs));
  if (o.ok) {
    o.detail = std::to_string(cases) + " cases (" + std::to_string(structured) + " full records, " +
               std::to_string(skipped) + " zero-capacity images skipped) in " + fmt("%.1f s", secs);
  }
  return o;
}

bool in_range(PixelPair p) { return p.x >= 0 && p.x <= 255 && p.y >= 0 && p.y <= 255; }

// 2. Codec invariants over every pair and both bits.
Outcome exhaustive_codec() {
  Outcome o;
  const auto t0 = Clock::now();
  std::size_t checks = 0;
  for (int x = 0; x <= 255; ++x) {
    for (int y = 0; y <= 255; ++y) {
      const AvgDiff a = forward_transform({x, y});
      if (!(inverse_transform(a) == PixelPair{x, y})) o.fail("transform round trip");
      // classification against a direct pixel-range test of both bits
      bool expandable = true, changeable = true;
      for (int b = 0; b <= 1; ++b) {
        expandable = expandable && oracle::pixels_in_range(a.l, 2 * a.h + b);
        changeable = changeable && oracle::pixels_in_range(a.l, 2 * floor_half(a.h) + b);
      }
      if (is_expandable(a) != expandable || is_changeable(a) != changeable) o.fail("classification");
      for (int b = 0; b <= 1; ++b) {
        ++checks;
        if (expandable) {
          const AvgDiff e = expand_embed_bit(a, b);
          const PixelPair p = inverse_transform(e);
          if (!in_range(p) || extract_bit(forward_transform(p)) != b || floor_half(e.h) != a.h ||
              !is_changeable(e) || !(inverse_transform({e.l, floor_half(e.h)}) == PixelPair{x, y})) {
            o.fail("expansion at (" + std::to_string(x) + "," + std::to_string(y) + ")");
          }
        }
        if (changeable) {
          const AvgDiff c = lsb_replace_bit(a, b);
          const PixelPair p = inverse_transform(c);
          if (!in_range(p) || extract_bit(forward_transform(p)) != b || !is_changeable(c) ||
              !(inverse_transform({c.l, 2 * floor_half(c.h) + extract_bit(a)}) == PixelPair{x, y})) {
            o.fail("LSB replacement at (" + std::to_string(x) + "," + std::to_string(y) + ")");
          }
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 1.0) o.fail("took " + fmt("%.3f s", secs));
  if (o.ok) o.detail = std::to_string(checks) + " pair/bit cases in " + fmt("%.3f s", secs);
  return o;
}

Payload full_payload(const GrayImage& img) {
  Payload p;
  p.hash = compute_image_hash(img);
  p.locator = "archive/mias/mdb001.pgm";
  p.features = quantize_features(extract_features(img));
  p.patient_code = "P001";
  return p;
}

// 3. Distortion scale on a smooth 256x256 image.
Outcome psnr_scale() {
  Outcome o;
  const GrayImage img = synth::smooth_texture(256, 256, 42);
  const Payload p = full_payload(img);
  const EmbedResult r = embed(img, p);
  const ExtractResult x = extract(r.image);
  const double wm = psnr(img, r.image);
  const double back = psnr(img, x.restored);
  if (wm < 38.0) o.fail("watermarked PSNR " + fmt("%.2f dB", wm));
  if (!std::isinf(back) || !x.verified) o.fail("restored image is not exact");
  if (o.ok) {
    o.detail = std::to_string(r.report.used_bits) + " payload bits, watermarked " + fmt("%.2f dB", wm) + ", restored inf";
  }
  return o;
}

// 4. Single-pixel LSB flips are all caught.
Outcome tamper_detection() {
  Outcome o;
  const GrayImage img = synth::smooth_texture(128, 128, 7);
  const GrayImage marked = embed(img, full_payload(img)).image;
  std::mt19937_64 rng(99);
  std::size_t misses = 0;
  for (int t = 0; t < 100; ++t) {
    GrayImage copy = marked;
    const std::size_t at = rng() % copy.size();
    copy.pixels()[at] ^= 1;
    if (extract(copy).verified) ++misses;
  }
  if (misses) o.fail(std::to_string(misses) + " of 100 flips undetected");
  else o.detail = "100 of 100 flips detected";
  return o;
}

CodeMap write_sources(const fs::path& src, std::size_t n, std::size_t side) {
  fs::create_directories(src);
  CodeMap codes;
  for (std::size_t i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img%03zu.pgm", i);
    write_pgm(src / name, synth::smooth_texture(side, side, 500 + i, 2.0));
    codes[name] = {"PAT-" + std::to_string(1000 + i), "/archive/study/" + std::string(name)};
  }
  return codes;
}

// 5. Manifest links rebuilt from the watermarks alone.
Outcome link_repair() {
  Outcome o;
  synth::ScratchDir dir("accept-repair");
  const CodeMap codes = write_sources(dir.path() / "src", 20, 96);
  Vault v = Vault::init(dir.path() / "vault");
  const BatchSummary s = v.watermark_all(dir.path() / "src", codes);
  if (s.watermarked != 20) o.fail("only " + std::to_string(s.watermarked) + " images watermarked");
  const VaultManifest before = v.manifest();
  for (VaultRecord& r : v.manifest().records) {
    r.locator.clear();
    r.patient_code.clear();
    r.status = RecordStatus::LinkBroken;
  }
  v.save();
  Vault reopened = Vault::open(v.dir());
  const RepairSummary rs = reopened.repair_links();
  if (!(Vault::open(v.dir()).manifest() == before)) o.fail("manifest differs after repair");
  if (o.ok) o.detail = std::to_string(rs.repaired) + " of 20 records restored field-for-field";
  return o;
}

struct ClassCorpus {
  synth::ScratchDir dir{"accept-classes"};
  fs::path labels_path;
  ClassLabels labels;
  std::unique_ptr<Vault> vault;

  ClassCorpus() {
    const fs::path src = dir.path() / "src";
    fs::create_directories(src);
    labels_path = dir.path() / "labels.csv";
    std::ofstream out(labels_path);
    std::uint64_t seed = 1;
    for (auto m : {synth::Modality::Mammography, synth::Modality::Bone, synth::Modality::Cardiac}) {
      for (int i = 0; i < 21; ++i) {
        const std::string name = std::string(synth::modality_name(m)) + "_" + std::to_string(i) + ".pgm";
        write_pgm(src / name, synth::modality_image(m, 256, 256, seed++));
        labels[name] = synth::modality_name(m);
        out << name << "," << synth::modality_name(m) << "\n";
      }
    }
    vault = std::make_unique<Vault>(Vault::init(dir.path() / "vault"));
    vault->watermark_all(src, {});
  }
};

// 6. Precision/recall structure on three classes of 21.
Outcome retrieval_structure(const ClassCorpus& c) {
  Outcome o;
  if (c.vault->manifest().records.size() != 63) {
    o.fail("vault holds " + std::to_string(c.vault->manifest().records.size()) + " images");
    return o;
  }
  const VaultIndex index = VaultIndex::build(*c.vault);
  const auto points = precision_recall(*c.vault, index, c.labels, kDefaultCutoffs, {.seed = 0});
  std::map<std::string, double> last_recall, recall40;
  for (const PRPoint& p : points) {
    if (p.D == 1) {
      if (p.precision != 1.0) o.fail(p.class_name + " precision@1 = " + fmt("%.4f", p.precision));
      if (std::abs(p.recall - 1.0 / 21) > 0.001) o.fail(p.class_name + " recall@1 = " + fmt("%.4f", p.recall));
    }
    auto it = last_recall.find(p.class_name);
    if (it != last_recall.end() && p.recall < it->second) o.fail(p.class_name + " recall decreases");
    last_recall[p.class_name] = p.recall;
    if (p.D == 40) recall40[p.class_name] = p.recall;
  }
  if (recall40.size() != 3) o.fail("missing D=40 points");
  std::string summary = "recall@40";
  for (const auto& [name, r] : recall40) {
    if (r < 0.5) o.fail(name + " recall@40 = " + fmt("%.3f", r));
    summary += " " + name + "=" + fmt("%.3f", r);
  }
  if (o.ok) o.detail = summary;
  return o;
}

// 7. Library features against a brute-force implementation.
Outcome feature_oracle() {
  Outcome o;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GrayImage img = synth::random_image(16, 16, 7000 + seed);
    const auto got = extract_features(img).to_array();
    const auto ref = oracle::features(img);
    for (std::size_t k = 0; k < got.size(); ++k) {
      // the first central moment mean is identically zero
      const double err = ref[k] == 0.0 || k == 6 ? std::abs(got[k] - ref[k]) > 1e-12 ? 1.0 : 0.0
                                                 : std::abs(got[k] - ref[k]) / std::abs(ref[k]);
      worst = std::max(worst, err);
      if (err > 1e-9) o.fail("component " + std::to_string(k) + " at seed " + std::to_string(seed));
    }
  }
  if (o.ok) o.detail = "50 images, worst relative error " + fmt("%.2e", worst);
  return o;
}

// 8. Usable capacity against a per-pair count.
Outcome capacity_oracle() {
  Outcome o;
  long long positive = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GrayImage img = seed % 2 ? synth::smooth_texture(32, 32, 9000 + seed, 1.0 + seed % 9)
                                   : synth::random_image(32, 32, 9000 + seed);
    const long long expected = oracle::usable_capacity(img);
    if (capacity_info(img).usable_bits() != expected) o.fail("mismatch at seed " + std::to_string(seed));
    if (expected > 0) ++positive;
  }
  if (o.ok) o.detail = "50 images exact (" + std::to_string(positive) + " with positive capacity)";
  return o;
}

// 9. Two eval runs of the command-line tool give identical bytes.
Outcome determinism(const ClassCorpus& c) {
  Outcome o;
  std::string outputs[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path csv = c.dir.path() / ("eval" + std::to_string(run) + ".csv");
    const std::string cmd = std::string("\"") + DEWM_CLI_PATH + "\" vault eval \"" +
                            c.vault->dir().string() + "\" --labels \"" + c.labels_path.string() +
                            "\" --seed 1234 -o \"" + csv.string() + "\"";
    const int raw = std::system(cmd.c_str());
    if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) o.fail("vault eval exited abnormally");
    outputs[run] = slurp(csv);
  }
  if (outputs[0].empty()) o.fail("empty CSV");
  if (outputs[0] != outputs[1]) o.fail("CSV outputs differ");
  if (o.ok) o.detail = std::to_string(outputs[0].size()) + " identical bytes";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.ok) ++failures;
    std::cout << (o.ok ? "PASS" : "FAIL") << "  " << id << " " << name << ": " << o.detail << std::endl;
  };

  report(1, "reversibility", reversibility);
  report(2, "exhaustive codec", exhaustive_codec);
  report(3, "PSNR scale", psnr_scale);
  report(4, "tamper detection", tamper_detection);
  report(5, "link repair", link_repair);
  std::unique_ptr<ClassCorpus> corpus;
  try {
    corpus = std::make_unique<ClassCorpus>();
  } catch (const std::exception& e) {
    std::cerr << "corpus setup failed: " << e.what() << "\n";
  }
  const auto with_corpus = [&](Outcome (*f)(const ClassCorpus&)) {
    return [&corpus, f] {
      if (!corpus) throw std::runtime_error("no corpus");
      return f(*corpus);
    };
  };
  report(6, "retrieval structure", with_corpus(retrieval_structure));
  report(7, "feature oracle", feature_oracle);
  report(8, "capacity oracle", capacity_oracle);
  report(9, "determinism", with_corpus(determinism));
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
