// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Expects BEVX_BENCH_EXE and BEVX_CONFIG_DIR at compile time.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "bevx/bench.hpp"
#include "bevx/prime.hpp"
#include "bevx/reference.hpp"
#include "bevx/transform.hpp"
#include "support.hpp"

using namespace bevx;
using namespace bevx::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s %-4s %-40s %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kTol = 1e-5;

// Trial grid for A1/A2: every combination of width, bins and grid size.
struct EquivalenceStats {
  std::size_t trials = 0;
  double worst_mvt = 0, worst_ftm = 0;
  std::uint64_t worst_mvt_seed = 0, worst_ftm_seed = 0;
  double seconds = 0;
};

EquivalenceStats run_equivalence_trials() {
  EquivalenceStats st;
  const auto t0 = Clock::now();
  const std::size_t widths[] = {8, 44}, bins[] = {16, 112}, grids[] = {16, 128};
  constexpr std::size_t kPerCombo = 13;
  constexpr std::size_t kChannels = 8;
  std::size_t trial = 0;
  for (std::size_t wi : widths)
    for (std::size_t nd : bins)
      for (std::size_t g : grids)
        for (std::size_t k = 0; k < kPerCombo; ++k, ++trial) {
          const std::uint64_t seed = trial_seed(2024, trial);
          Rng rng(seed);
          RigSpec spec;
          spec.feature_width = wi;
          const Scene scene = make_scene(random_rig(spec, rng), {2.0, 58.0, nd}, {51.2, g, g}, kChannels);
          const FrustumGeometry f = scene.frustum();
          const BevGrid grid = scene.grid();
          const RingRayPair rr = build_ring_ray(f, grid);
          const std::size_t W = f.rays();
          const Tensor feat = random_tensor({W, kChannels}, rng);
          const Tensor depth = random_simplex_rows(W, nd, rng);
          const Tensor lifted = lift(feat, depth);

          const double mvt = max_relative_difference(vt_matrixvt(feat, depth, rr), vt_composed(lifted, rr));
          const double ftm = max_relative_difference(vt_ftm(lifted, build_ftm(f, grid)),
                                                     splat_reference(lifted, f, grid));
          if (mvt >= st.worst_mvt) st.worst_mvt = mvt, st.worst_mvt_seed = seed;
          if (ftm >= st.worst_ftm) st.worst_ftm = ftm, st.worst_ftm_seed = seed;
          ++st.trials;
        }
  st.seconds = elapsed(t0);
  return st;
}

struct SmallSceneStats {
  std::size_t scenes = 0;
  std::size_t exact = 0;
  std::size_t contained = 0;
  double spurious_min = 1, spurious_max = 0, spurious_mean = 0;
  std::uint64_t first_mismatch_seed = 0;
  double seconds = 0;
};

SmallSceneStats run_small_scenes() {
  SmallSceneStats st;
  const auto t0 = Clock::now();
  double spurious_sum = 0;
  for (std::size_t i = 0; i < 24; ++i) {
    const std::uint64_t seed = trial_seed(77, i);
    Rng rng(seed);
    RigSpec spec;
    spec.cameras = 1 + rng() % 6;
    spec.feature_width = 1 + rng() % (64 / spec.cameras);
    spec.feature_height = 1 + rng() % 4;
    const std::size_t nd = 1 + rng() % 32;
    const std::size_t h = 1 + rng() % 32, w = 1 + rng() % 32;
    const double extent = 10.0 + 50.0 * std::uniform_real_distribution<double>()(rng);
    const Scene scene = make_scene(random_rig(spec, rng), {1.0, 60.0, nd}, {extent, h, w});
    const FrustumGeometry f = scene.frustum();
    const BevGrid grid = scene.grid();
    const RingRayPair rr = build_ring_ray(f, grid);
    const DenseRingRay oracle = ring_ray_oracle(f, grid);
    const bool exact = densify(rr.ring) == oracle.ring && densify(rr.ray) == oracle.ray;
    if (exact) {
      ++st.exact;
    } else if (st.first_mismatch_seed == 0) {
      st.first_mismatch_seed = seed;
    }
    const FidelityReport fid = compare_ftm(build_ftm(f, grid), effective_ftm(rr));
    const bool dense_contained = [&] {
      const Tensor a = ftm_oracle(f, grid), b = densify(effective_ftm(rr));
      for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] > b[k]) return false;
      return true;
    }();
    st.contained += fid.contained && dense_contained;
    const double rate = fid.spurious_rate();
    st.spurious_min = std::min(st.spurious_min, rate);
    st.spurious_max = std::max(st.spurious_max, rate);
    spurious_sum += rate;
    ++st.scenes;
  }
  st.spurious_mean = spurious_sum / double(st.scenes);
  st.seconds = elapsed(t0);
  return st;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BEVX_BENCH_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace

int main() {
  const std::string configs = BEVX_CONFIG_DIR;

  EquivalenceStats eq;
  report("A1", "matrixvt == composed pipeline", [&] {
    eq = run_equivalence_trials();
    std::ostringstream os;
    os << eq.trials << " trials, max rel diff " << fmt("%.3g", eq.worst_mvt) << " (seed "
       << eq.worst_mvt_seed << "), tol 1e-5, limit 120s";
    return Outcome{eq.trials >= 100 && eq.worst_mvt <= kTol && eq.seconds <= 120.0, os.str()};
  });

  report("A2", "ftm transport == splat", [&] {
    std::ostringstream os;
    os << eq.trials << " trials, max rel diff " << fmt("%.3g", eq.worst_ftm) << " (seed "
       << eq.worst_ftm_seed << "), tol 1e-5";
    return Outcome{eq.trials >= 100 && eq.worst_ftm <= kTol, os.str()};
  });

  report("A3", "cost model flops/memory", [] {
    const CostReport r = cost_model(80, 112, 44, 128, 128);
    const bool ok = r.reduction_flops > 46.0 && r.reduction_flops < 46.5 && r.saving_memory >= 0.96 &&
                    r.saving_memory <= 0.97 &&
                    std::abs(r.reduction_flops - 8960.0 / 193.0) < 1e-12 &&
                    std::abs(r.saving_memory - (1.0 - 156.0 / 4928.0)) < 1e-12;
    return Outcome{ok, "reduction " + fmt("%.4f", r.reduction_flops) + ", saving " +
                           fmt("%.4f", r.saving_memory)};
  });

  report("A4", "parameter reduction ratio", [] {
    const double r44 = cost_model(80, 112, 44, 128, 128).param_reduction;
    const double r88 = cost_model(80, 112, 88, 128, 128).param_reduction;
    auto sig3 = [](double v) {
      const double scale = std::pow(10.0, 2 - std::floor(std::log10(std::abs(v))));
      return std::round(v * scale) / scale;
    };
    const bool ok = sig3(r44) == 31.6 && sig3(r88) == sig3(49.28);
    return Outcome{ok, "W_I=44: " + fmt("%.4f", r44) + ", W_I=88: " + fmt("%.4f", r88)};
  });

  SmallSceneStats small;
  report("A5", "ring/ray == exhaustive generation loop", [&] {
    small = run_small_scenes();
    std::ostringstream os;
    os << small.exact << "/" << small.scenes << " scenes bit-exact";
    if (small.first_mismatch_seed) os << ", first mismatch seed " << small.first_mismatch_seed;
    os << ", limit 60s";
    return Outcome{small.scenes >= 20 && small.exact == small.scenes && small.seconds <= 60.0, os.str()};
  });

  report("A6", "exact FTM contained in effective FTM", [&] {
    std::ostringstream os;
    os << small.contained << "/" << small.scenes << " contained; spurious rate min "
       << fmt("%.3f", small.spurious_min) << " mean " << fmt("%.3f", small.spurious_mean) << " max "
       << fmt("%.3f", small.spurious_max);
    return Outcome{small.scenes >= 20 && small.contained == small.scenes, os.str()};
  });

  report("A7", "prime depth preserves the simplex", [] {
    Rng rng(trial_seed(7, 7));
    const std::size_t nc = 4, h = 8, w = 250, nd = 32;
    const Tensor depth = random_simplex_rows(nc * h * w, nd, rng).reshaped({nc, h, w, nd});
    const PrimeAttention attn = PrimeAttention::softmax(random_tensor({nc, h, w}, rng, -4.f, 4.f));
    const Tensor out = prime_depth(depth, attn);
    double worst = 0;
    for (std::size_t col = 0; col < nc * w; ++col) {
      double sum = 0;
      for (std::size_t d = 0; d < nd; ++d) sum += out[col * nd + d];
      worst = std::max(worst, std::abs(sum - 1.0));
    }
    return Outcome{worst <= kTol, std::to_string(nc * w) + " columns, max |sum-1| " + fmt("%.3g", worst)};
  });

  report("A8", "matrixvt >= 2x faster than ftm (S1, S3)", [&] {
    const Scene scene = load_scene(configs + "/nuscenes_like.json");
    BenchOptions opts;
    opts.settings = resolve_settings(scene, "S1,S3");
    opts.backends = {Backend::matrixvt, Backend::ftm};
    opts.repeats = 20;
    const auto records = run_bench(scene, opts);
    bool ok = true;
    std::ostringstream os;
    for (std::size_t i = 0; i + 1 < records.size(); i += 2) {
      const BenchRecord& mvt = records[i];
      const BenchRecord& ftm = records[i + 1];
      const double speedup = ftm.median_s / mvt.median_s;
      ok = ok && mvt.median_s < ftm.median_s && speedup >= 2.0 && mvt.repeats >= 20;
      os << mvt.setting << " " << fmt("%.2f", mvt.median_s * 1e3) << " vs " << fmt("%.2f", ftm.median_s * 1e3)
         << " ms (" << fmt("%.1f", speedup) << "x) ";
    }
    return Outcome{ok && records.size() == 4, os.str()};
  });

  report("A9", "CLI exit codes and CSV round-trip", [&] {
    const auto dir = std::filesystem::temp_directory_path() / "bevx_acceptance";
    std::filesystem::create_directories(dir);
    const std::string cfg = configs + "/nuscenes_like.json";
    const int pristine = run_cli("check --config " + cfg + " --trials 5 --quiet");
    const int corrupt = run_cli("check --config " + cfg + " --trials 5 --quiet --corrupt-ring");
    const auto csv_path = dir / "run.csv";
    const int run = run_cli("run --config " + configs + "/single_ray.json --settings scene --backends "
                            "scatter,ftm,ringray_composed,matrixvt --repeats 3 --out " + csv_path.string());
    bool round_trip = false;
    if (run == 0) {
      std::ifstream in(csv_path);
      const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      const auto records = parse_csv(text);
      round_trip = records.size() == 4 && emit_csv(records) == text;
    }
    std::filesystem::remove_all(dir);
    std::ostringstream os;
    os << "check exit " << pristine << ", corrupted exit " << corrupt << ", run exit " << run
       << ", csv round-trip " << (round_trip ? "ok" : "broken");
    return Outcome{pristine == 0 && corrupt == 1 && run == 0 && round_trip, os.str()};
  });

  std::printf("%s\n", failures ? "acceptance: FAILED" : "acceptance: all criteria passed");
  return failures ? 1 : 0;
}
