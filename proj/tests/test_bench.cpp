#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "bevx/bench.hpp"
#include "bevx/error.hpp"
#include "support.hpp"

using namespace bevx;
using namespace bevx::testing;

namespace {

Scene one_cell_scene() { return single_ray_scene(8, 8.0, 8.0, 1); }

BenchRecord sample_record() {
  return {"S1", Backend::matrixvt, 0.00123, 0.001, 0.0015, 2555904, 20};
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("backend and setting names") {
  for (Backend b : {Backend::scatter, Backend::ftm, Backend::ringray_composed, Backend::matrixvt})
    CHECK(parse_backend(backend_name(b)) == b);
  try {
    parse_backend("dense");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("ringray_composed") != std::string::npos);
  }
  CHECK(parse_backends("matrixvt, ftm").size() == 2);
  CHECK_THROWS_AS(parse_backends(""), UsageError);

  const Scene scene = load_scene(BEVX_CONFIG_DIR "/nuscenes_like.json");
  CHECK(builtin_settings().size() == 6);
  CHECK(resolve_setting(scene, "S3").feature_width == 88);
  CHECK(resolve_setting(scene, "scene").feature_width == 44);
  CHECK_THROWS_AS(resolve_setting(scene, "S7"), UsageError);
  CHECK_THROWS_AS(apply_setting(one_cell_scene(), resolve_setting(scene, "S1")), UsageError);

  const Scene s4 = apply_setting(scene, resolve_setting(scene, "S4"));
  CHECK(s4.rig.feature_width() == 88);
  CHECK(s4.rig.feature_height() == 32);
  CHECK(s4.bev.h_cells == 256);
  CHECK(s4.channels == 80);
  CHECK(s4.bev.extent == scene.bev.extent);
}

TEST_CASE("intermediate parameter counts") {
  const CostReport cost = cost_model(80, 112, 44, 128, 128);
  CHECK(intermediate_params(Backend::matrixvt, cost) == 2555904ull);
  CHECK(intermediate_params(Backend::ftm, cost) == 80740352ull);
  CHECK(double(intermediate_params(Backend::ftm, cost)) / double(intermediate_params(Backend::matrixvt, cost)) ==
        doctest::Approx(31.6).epsilon(1e-3));
  CHECK(intermediate_params(Backend::scatter, cost) == 44ull * 112 * 80 + 44ull * 112);
  CHECK(intermediate_params(Backend::ringray_composed, cost) == 2555904ull + 44ull * 80 * 128 * 128);
}

TEST_CASE("quantiles") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.5) == 1.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.1) == doctest::Approx(1.4));
  CHECK(quantile({7.0}, 0.9) == 7.0);
  CHECK_THROWS_AS(quantile({}, 0.5), ValidationError);
}

TEST_CASE("run on a one-cell grid") {
  const Scene scene = one_cell_scene();
  BenchOptions opts;
  opts.settings = {scene_setting(scene)};
  opts.backends = parse_backends("scatter,ftm,ringray_composed,matrixvt");
  opts.repeats = 3;
  const auto records = run_bench(scene, opts);
  REQUIRE(records.size() == 4);
  const CostReport cost = cost_model(scene.channels, 8, 1, 1, 1);
  for (const BenchRecord& r : records) {
    CHECK(r.setting == "scene");
    CHECK(r.repeats == 3);
    CHECK(std::isfinite(r.median_s));
    CHECK(r.p10_s <= r.median_s);
    CHECK(r.median_s <= r.p90_s);
    CHECK(r.p10_s >= 0.0);
    CHECK(r.intermediate_params == intermediate_params(r.backend, cost));
  }

  opts.repeats = 2;
  CHECK_THROWS_AS(run_bench(scene, opts), UsageError);
}

TEST_CASE("run with a cache directory reuses matrices") {
  const Scene scene = single_ray_scene();
  const auto dir = std::filesystem::temp_directory_path() / "bevx_bench_cache";
  std::filesystem::remove_all(dir);
  BenchOptions opts;
  opts.settings = {scene_setting(scene)};
  opts.backends = {Backend::matrixvt, Backend::ftm};
  opts.repeats = 3;
  opts.cache_dir = dir;
  const auto first = run_bench(scene, opts);
  CHECK(std::filesystem::exists(dir / "scene" / "manifest.json"));
  const auto second = run_bench(scene, opts);
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i)
    CHECK(second[i].intermediate_params == first[i].intermediate_params);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv") {
  CHECK(emit_csv({}) == "setting,backend,median_s,p10_s,p90_s,intermediate_params,repeats\n");
  CHECK(parse_csv(emit_csv({})).empty());

  const std::string one = emit_csv({sample_record()});
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);

  Rng rng(61);
  std::vector<BenchRecord> many;
  std::uniform_real_distribution<double> t(1e-7, 3.0);
  for (int i = 0; i < 20; ++i) {
    double a = t(rng), b = t(rng), c = t(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    many.push_back({"S" + std::to_string(1 + i % 6), Backend(i % 4), b, a, c, rng() % 100000000, 20});
  }
  CHECK(parse_csv(emit_csv(many)) == many);

  CHECK_THROWS_AS(parse_csv(""), FormatError);
  CHECK_THROWS_AS(parse_csv("setting,backend\n"), FormatError);
  std::string bad = one;
  bad.replace(bad.find("matrixvt"), 8, "gpu");
  CHECK_THROWS_AS(parse_csv(bad), FormatError);
  std::string short_row = one.substr(0, one.rfind(','));
  CHECK_THROWS_AS(parse_csv(short_row + "\n"), FormatError);
}

TEST_CASE("json output") {
  const auto j = nlohmann::json::parse(emit_json({sample_record()}));
  REQUIRE(j.at("records").size() == 1);
  const auto& r = j["records"][0];
  CHECK(r.at("setting") == "S1");
  CHECK(r.at("backend") == "matrixvt");
  CHECK(r.at("intermediate_params") == 2555904);
  CHECK(r.at("median_s").get<double>() == 0.00123);
}

TEST_CASE("check: single ray passes, corruption fails, zero features pass") {
  const Scene scene = single_ray_scene();
  CheckOptions opts;
  opts.trials = 10;
  const CheckReport ok = run_check(scene, opts);
  CHECK(ok.passed);
  CHECK(ok.trials.size() == 10);
  CHECK_FALSE(ok.first_failed_seed());
  CHECK(ok.spurious_rate == 0.0);

  opts.corrupt_ring = true;
  const CheckReport bad = run_check(scene, opts);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.first_failed_seed());
  CHECK(*bad.first_failed_seed() == trial_seed(opts.seed, 0));
  CHECK(bad.text().find("FAIL") != std::string::npos);

  opts.corrupt_ring = false;
  opts.zero_features = true;
  const CheckReport zero = run_check(scene, opts);
  CHECK(zero.passed);
  for (const TrialResult& t : zero.trials) {
    CHECK(t.ftm_vs_splat == 0.0);
    CHECK(t.matrixvt_vs_composed == 0.0);
  }

  opts.trials = 0;
  CHECK_THROWS_AS(run_check(scene, opts), UsageError);
}

TEST_CASE("check is deterministic and passes on a multi-camera rig") {
  Rng rng(62);
  RigSpec spec;
  spec.feature_width = 6;
  const Scene scene = make_scene(random_rig(spec, rng), {2.0, 58.0, 16}, {51.2, 32, 32}, 6);
  CheckOptions opts;
  opts.trials = 5;
  opts.seed = 99;
  const CheckReport a = run_check(scene, opts);
  const CheckReport b = run_check(scene, opts);
  CHECK(a.passed);
  CHECK(a.text() == b.text());
  CHECK(a.spurious_rate > 0.0);
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
}

}  // TEST_SUITE
