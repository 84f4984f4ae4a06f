#include "bevx/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <future>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bevx/error.hpp"
#include "bevx/io.hpp"
#include "bevx/prime.hpp"
#include "bevx/reference.hpp"

namespace bevx {

namespace {

constexpr std::array<Backend, 4> kBackends{Backend::scatter, Backend::ftm,
                                           Backend::ringray_composed, Backend::matrixvt};

std::vector<std::string_view> split(std::string_view list, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(sep, start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scatter: return "scatter";
    case Backend::ftm: return "ftm";
    case Backend::ringray_composed: return "ringray_composed";
    case Backend::matrixvt: return "matrixvt";
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  for (Backend b : kBackends) {
    if (backend_name(b) == name) return b;
  }
  throw UsageError("unknown backend '" + std::string(name) +
                   "'; valid backends: scatter, ftm, ringray_composed, matrixvt");
}

std::vector<Backend> parse_backends(std::string_view comma_list) {
  std::vector<Backend> out;
  for (auto item : split(comma_list, ',')) out.push_back(parse_backend(item));
  if (out.empty()) throw UsageError("no backends given; valid backends: scatter, ftm, ringray_composed, matrixvt");
  return out;
}

const std::vector<TransformSetting>& builtin_settings() {
  static const std::vector<TransformSetting> settings{
      {"S1", 80, 16, 44, 128, 128, 6, 112},   {"S2", 80, 16, 44, 256, 256, 6, 112},
      {"S3", 80, 32, 88, 128, 128, 6, 112},   {"S4", 80, 32, 88, 256, 256, 6, 112},
      {"S5", 256, 32, 88, 256, 256, 6, 112},  {"S6", 256, 64, 176, 256, 256, 6, 112},
  };
  return settings;
}

TransformSetting scene_setting(const Scene& scene) {
  return {"scene",
          scene.channels,
          scene.rig.feature_height(),
          scene.rig.feature_width(),
          scene.bev.h_cells,
          scene.bev.w_cells,
          scene.rig.camera_count(),
          scene.depth.count};
}

TransformSetting resolve_setting(const Scene& scene, std::string_view name) {
  if (name == "scene") return scene_setting(scene);
  for (const auto& s : builtin_settings()) {
    if (s.name == name) return s;
  }
  throw UsageError("unknown setting '" + std::string(name) + "'; valid settings: S1, S2, S3, S4, S5, S6, scene");
}

std::vector<TransformSetting> resolve_settings(const Scene& scene, std::string_view comma_list) {
  std::vector<TransformSetting> out;
  for (auto item : split(comma_list, ',')) out.push_back(resolve_setting(scene, item));
  if (out.empty()) throw UsageError("no settings given; valid settings: S1, S2, S3, S4, S5, S6, scene");
  return out;
}

Scene apply_setting(const Scene& scene, const TransformSetting& setting) {
  if (setting.cameras != scene.rig.camera_count()) {
    throw UsageError("setting " + setting.name + " needs " + std::to_string(setting.cameras) +
                     " cameras but the config has " + std::to_string(scene.rig.camera_count()));
  }
  Scene out = scene;
  out.rig = scene.rig.resampled(setting.feature_width, setting.feature_height);
  out.depth.count = setting.depth_bins;
  out.bev.h_cells = setting.bev_h;
  out.bev.w_cells = setting.bev_w;
  out.channels = setting.channels;
  out.reference_row = std::nullopt;
  return out;
}

std::uint64_t intermediate_params(Backend backend, const CostReport& cost) {
  switch (backend) {
    case Backend::scatter: return cost.mem_lifted + cost.mem_point_targets;
    case Backend::ftm: return cost.mem_params_full_ftm;
    case Backend::ringray_composed: return cost.mem_params_ringray + cost.mem_composed_intermediate;
    case Backend::matrixvt: return cost.mem_params_ringray;
  }
  return 0;
}

double quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double pos = std::clamp(q, 0.0, 1.0) * double(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  const double frac = pos - double(lo);
  return samples[lo] + (samples[hi] - samples[lo]) * frac;
}

namespace {

struct Inputs {
  Tensor features;  // W x C
  Tensor depths;    // W x N_d, rows on the simplex
};

void softmax_rows(Tensor& t) {
  const std::size_t rows = t.dim(0), cols = t.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    float* row = t.data().data() + r * cols;
    float peak = *std::max_element(row, row + cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sum += std::exp(double(row[c] - peak));
    for (std::size_t c = 0; c < cols; ++c) row[c] = float(std::exp(double(row[c] - peak)) / sum);
  }
}

Inputs random_inputs(std::size_t rays, std::size_t channels, std::size_t bins, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
  std::normal_distribution<float> normal(0.0f, 2.0f);
  Inputs in{Tensor({rays, channels}), Tensor({rays, bins})};
  for (float& v : in.features.data()) v = uni(rng);
  for (float& v : in.depths.data()) v = normal(rng);
  softmax_rows(in.depths);
  return in;
}

struct Prepared {
  TransformSetting setting;
  CostReport cost;
  Inputs inputs;
  std::vector<std::optional<std::size_t>> targets;
  SparseBinaryMatrix ftm;
  RingRayPair rr;
};

Prepared prepare(const Scene& base, const TransformSetting& setting, std::uint64_t seed,
                 const std::optional<std::filesystem::path>& cache_dir,
                 const std::vector<Backend>& backends) {
  const Scene scene = apply_setting(base, setting);
  const FrustumGeometry frustum = scene.frustum();
  const BevGrid grid = scene.grid();
  Prepared p{setting,
             cost_model(setting.channels, setting.depth_bins, setting.feature_width,
                        setting.bev_h, setting.bev_w),
             random_inputs(frustum.rays(), setting.channels, setting.depth_bins, seed),
             {},
             SparseBinaryMatrix(),
             {}};
  auto uses = [&](Backend b) { return std::find(backends.begin(), backends.end(), b) != backends.end(); };
  if (uses(Backend::scatter)) p.targets = splat_targets(frustum, grid);

  std::optional<std::filesystem::path> dir;
  if (cache_dir) dir = *cache_dir / setting.name;
  const std::uint64_t hash = scene_hash(scene);
  std::optional<RingRayPair> cached;
  if (dir) cached = load_ring_ray(*dir, hash);
  if (cached) {
    p.rr = std::move(*cached);
    if (uses(Backend::ftm)) {
      std::error_code ec;
      if (std::filesystem::exists(*dir / "ftm.bxs", ec)) {
        p.ftm = io::load_sparse(*dir / "ftm.bxs");
      } else {
        p.ftm = build_ftm(frustum, grid);
        io::save_sparse(*dir / "ftm.bxs", p.ftm);
      }
    }
  } else {
    p.rr = build_ring_ray(frustum, grid);
    if (uses(Backend::ftm)) p.ftm = build_ftm(frustum, grid);
    if (dir) {
      save_ring_ray(*dir, p.rr, hash);
      if (uses(Backend::ftm)) io::save_sparse(*dir / "ftm.bxs", p.ftm);
    }
  }
  return p;
}

// Keeps results observable so the timed call is not elided.
volatile float g_sink = 0.0f;

Tensor run_backend(Backend backend, const Prepared& p) {
  const Inputs& in = p.inputs;
  switch (backend) {
    case Backend::scatter: {
      Tensor lifted = lift(in.features, in.depths);
      const std::size_t points = lifted.dim(0) * lifted.dim(1), c = lifted.dim(2);
      return scatter_add(std::move(lifted).reshaped({points, c}), p.targets, p.rr.cells());
    }
    case Backend::ftm: return vt_ftm(lift(in.features, in.depths), p.ftm);
    case Backend::ringray_composed: return vt_composed(lift(in.features, in.depths), p.rr);
    case Backend::matrixvt: return vt_matrixvt(in.features, in.depths, p.rr);
  }
  throw UsageError("unknown backend");
}

BenchRecord time_backend(const Prepared& p, Backend backend, std::size_t warmup,
                         std::size_t repeats) {
  using clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < warmup; ++i) g_sink = g_sink + run_backend(backend, p)[0];
  std::vector<double> samples;
  samples.reserve(repeats);
  for (std::size_t i = 0; i < repeats; ++i) {
    const auto t0 = clock::now();
    Tensor out = run_backend(backend, p);
    const auto t1 = clock::now();
    g_sink = g_sink + out[0];
    samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  return {p.setting.name,
          backend,
          quantile(samples, 0.5),
          quantile(samples, 0.1),
          quantile(samples, 0.9),
          intermediate_params(backend, p.cost),
          repeats};
}

}  // namespace

std::vector<BenchRecord> run_bench(const Scene& scene, const BenchOptions& options) {
  if (options.repeats < 3) {
    throw UsageError("repeats must be at least 3, got " + std::to_string(options.repeats));
  }
  if (options.settings.empty()) throw UsageError("no settings given");
  if (options.backends.empty()) throw UsageError("no backends given");

  std::vector<Prepared> prepared;
  prepared.reserve(options.settings.size());
  if (options.parallel) {
    std::vector<std::future<Prepared>> jobs;
    for (const auto& s : options.settings) {
      jobs.push_back(std::async(std::launch::async, [&scene, &options, s] {
        return prepare(scene, s, options.seed, options.cache_dir, options.backends);
      }));
    }
    for (auto& j : jobs) prepared.push_back(j.get());
  } else {
    for (const auto& s : options.settings) {
      prepared.push_back(prepare(scene, s, options.seed, options.cache_dir, options.backends));
    }
  }

  std::vector<BenchRecord> records;
  for (const auto& p : prepared) {
    for (Backend b : options.backends) {
      records.push_back(time_backend(p, b, options.warmup, options.repeats));
    }
  }
  return records;
}

namespace {

constexpr std::string_view kCsvHeader =
    "setting,backend,median_s,p10_s,p90_s,intermediate_params,repeats";

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

template <class T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("CSV line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string emit_csv(const std::vector<BenchRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += r.setting;
    out += ',';
    out += backend_name(r.backend);
    out += ',';
    append_double(out, r.median_s);
    out += ',';
    append_double(out, r.p10_s);
    out += ',';
    append_double(out, r.p90_s);
    out += ',';
    out += std::to_string(r.intermediate_params);
    out += ',';
    out += std::to_string(r.repeats);
    out += '\n';
  }
  return out;
}

std::vector<BenchRecord> parse_csv(std::string_view text) {
  std::vector<BenchRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++line_no;
    if (!header_seen) {
      if (line != kCsvHeader) throw FormatError("CSV header mismatch: '" + std::string(line) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t fs = 0;
    while (true) {
      std::size_t comma = line.find(',', fs);
      fields.push_back(line.substr(fs, comma == std::string_view::npos ? line.npos : comma - fs));
      if (comma == std::string_view::npos) break;
      fs = comma + 1;
    }
    if (fields.size() != 7) {
      throw FormatError("CSV line " + std::to_string(line_no) + ": expected 7 fields, got " +
                        std::to_string(fields.size()));
    }
    BenchRecord r;
    r.setting = std::string(fields[0]);
    try {
      r.backend = parse_backend(fields[1]);
    } catch (const UsageError& e) {
      throw FormatError("CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    r.median_s = parse_number<double>(fields[2], line_no);
    r.p10_s = parse_number<double>(fields[3], line_no);
    r.p90_s = parse_number<double>(fields[4], line_no);
    r.intermediate_params = parse_number<std::uint64_t>(fields[5], line_no);
    r.repeats = parse_number<std::size_t>(fields[6], line_no);
    records.push_back(std::move(r));
  }
  if (!header_seen) throw FormatError("empty CSV");
  return records;
}

std::string emit_json(const std::vector<BenchRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    arr.push_back({{"setting", r.setting},
                   {"backend", backend_name(r.backend)},
                   {"median_s", r.median_s},
                   {"p10_s", r.p10_s},
                   {"p90_s", r.p90_s},
                   {"intermediate_params", r.intermediate_params},
                   {"repeats", r.repeats}});
  }
  return nlohmann::json{{"records", arr}}.dump(2) + "\n";
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  // splitmix64
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::optional<std::uint64_t> CheckReport::first_failed_seed() const {
  for (const auto& t : trials) {
    if (!t.passed) return t.seed;
  }
  return std::nullopt;
}

std::string CheckReport::text() const {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific;
  for (const auto& t : trials) {
    os << "trial " << t.trial << " seed " << t.seed << ": " << (t.passed ? "PASS" : "FAIL")
       << "  ftm~splat " << t.ftm_vs_splat << "  matrixvt~composed " << t.matrixvt_vs_composed
       << "  matrixvt~effective_ftm " << t.matrixvt_vs_effective_ftm << "  containment "
       << (t.contained ? "ok" : "VIOLATED") << '\n';
  }
  os << std::fixed;
  os.precision(4);
  os << "ftm nnz " << ftm_nnz << ", effective ftm nnz " << effective_nnz << ", spurious rate "
     << spurious_rate << '\n';
  os << (passed ? "check passed" : "check FAILED");
  if (auto seed = first_failed_seed()) os << " (first failing trial seed " << *seed << ")";
  os << '\n';
  return os.str();
}

CheckReport run_check(const Scene& scene, const CheckOptions& options) {
  if (options.trials == 0) throw UsageError("trials must be at least 1");
  const FrustumGeometry frustum = scene.frustum();
  const BevGrid grid = scene.grid();
  const SparseBinaryMatrix ftm = build_ftm(frustum, grid);
  RingRayPair rr = build_ring_ray(frustum, grid);
  if (options.corrupt_ring) {
    for (std::size_t s = 0; s < rr.ring.rows(); ++s) {
      auto row = rr.ring.row(s);
      if (!row.empty()) {
        rr.ring = rr.ring.with_flipped(s, row.front());
        break;
      }
    }
  }
  const SparseBinaryMatrix effective = effective_ftm(rr);
  const FidelityReport fidelity = compare_ftm(ftm, effective);

  const std::size_t nc = scene.rig.camera_count(), h = scene.rig.feature_height(),
                    w = scene.rig.feature_width(), c = scene.channels, nd = scene.depth.count;
  CheckReport report;
  report.ftm_nnz = fidelity.ftm_nnz;
  report.effective_nnz = fidelity.effective_nnz;
  report.spurious_rate = fidelity.spurious_rate();
  report.passed = true;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    const std::uint64_t seed = trial_seed(options.seed, trial);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
    std::normal_distribution<float> normal(0.0f, 1.5f);

    Tensor feature({nc, h, w, c});
    if (!options.zero_features) {
      for (float& v : feature.data()) v = uni(rng);
    }
    Tensor depth({nc * h * w, nd});
    for (float& v : depth.data()) v = normal(rng);
    softmax_rows(depth);
    Tensor logits({nc, h, w});
    for (float& v : logits.data()) v = normal(rng);
    Tensor pos_embed({h, w, c});
    if (!options.zero_features) {
      for (float& v : pos_embed.data()) v = 0.1f * uni(rng);
    }
    const PrimeAttention attn = PrimeAttention::softmax(logits);
    const Tensor pf = prime_feature(feature, pos_embed, RefineMap::identity(c)).reshaped({nc * w, c});
    const Tensor pd = prime_depth(std::move(depth).reshaped({nc, h, w, nd}), attn).reshaped({nc * w, nd});
    const Tensor lifted = lift(pf, pd);

    TrialResult t;
    t.trial = trial;
    t.seed = seed;
    t.ftm_vs_splat = max_relative_difference(vt_ftm(lifted, ftm), splat_reference(lifted, frustum, grid));
    const Tensor mvt = vt_matrixvt(pf, pd, rr);
    t.matrixvt_vs_composed = max_relative_difference(mvt, vt_composed(lifted, rr));
    t.matrixvt_vs_effective_ftm = max_relative_difference(mvt, vt_ftm(lifted, effective));
    t.contained = fidelity.contained;
    t.passed = t.ftm_vs_splat <= kCheckTolerance && t.matrixvt_vs_composed <= kCheckTolerance &&
               t.matrixvt_vs_effective_ftm <= kCheckTolerance && t.contained;
    report.passed = report.passed && t.passed;
    report.trials.push_back(t);
  }
  return report;
}

}  // namespace bevx
