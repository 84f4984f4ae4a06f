// bench: benchmark and verification front end over the bevx C API.
//
//   bench run    --config scene.json --settings S1,S3 --backends matrixvt,ftm
//                --repeats 20 --seed 7 --out results.csv [--json results.json]
//   bench check  --config scene.json --trials 50 --seed 7
//   bench export --config scene.json --out-dir matrices/
//   bench cost   --channels 80 --depth-bins 112 --feature-width 44 --bev-h 128 --bev-w 128
//
// Exit codes: 0 success, 1 check failure, 2 usage or input error.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "bevx/bevx.h"

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct SceneDeleter {
  void operator()(bevx_scene* s) const { bevx_scene_free(s); }
};
struct RecordsDeleter {
  void operator()(bevx_records* r) const { bevx_records_free(r); }
};
struct ReportDeleter {
  void operator()(bevx_check_report* r) const { bevx_check_report_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { bevx_string_free(s); }
};

using ScenePtr = std::unique_ptr<bevx_scene, SceneDeleter>;
using RecordsPtr = std::unique_ptr<bevx_records, RecordsDeleter>;
using ReportPtr = std::unique_ptr<bevx_check_report, ReportDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

int report_error(bevx_status status) {
  std::fprintf(stderr, "bench: %s: %s\n", bevx_status_name(status), bevx_last_error());
  return kExitUsage;
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::fprintf(stderr, "bench: cannot write %s\n", path.c_str());
    return false;
  }
  out << text;
  return static_cast<bool>(out);
}

ScenePtr load(const std::string& path, bevx_status* status) {
  bevx_scene* raw = nullptr;
  *status = bevx_scene_load(path.c_str(), &raw);
  return ScenePtr(raw);
}

struct RunArgs {
  std::string config;
  std::string settings = "S1";
  std::string backends = "matrixvt,ftm";
  unsigned repeats = 20;
  unsigned warmup = 2;
  std::uint64_t seed = 7;
  std::string out;
  std::string json;
  std::string cache_dir;
  bool parallel = false;
};

int cmd_run(const RunArgs& args) {
  bevx_status status;
  ScenePtr scene = load(args.config, &status);
  if (status != BEVX_OK) return report_error(status);

  bevx_bench_options opts;
  bevx_bench_options_init(&opts);
  opts.settings = args.settings.c_str();
  opts.backends = args.backends.c_str();
  opts.repeats = args.repeats;
  opts.warmup = args.warmup;
  opts.seed = args.seed;
  opts.parallel = args.parallel ? 1 : 0;
  opts.cache_dir = args.cache_dir.empty() ? nullptr : args.cache_dir.c_str();

  bevx_records* raw = nullptr;
  status = bevx_bench_run(scene.get(), &opts, &raw);
  RecordsPtr records(raw);
  if (status != BEVX_OK) return report_error(status);

  char* csv_raw = nullptr;
  if ((status = bevx_records_csv(records.get(), &csv_raw)) != BEVX_OK) return report_error(status);
  StringPtr csv(csv_raw);
  if (args.out.empty()) {
    std::fputs(csv.get(), stdout);
  } else if (!write_file(args.out, csv.get())) {
    return kExitUsage;
  }
  if (!args.json.empty()) {
    char* json_raw = nullptr;
    if ((status = bevx_records_json(records.get(), &json_raw)) != BEVX_OK) return report_error(status);
    StringPtr json(json_raw);
    if (!write_file(args.json, json.get())) return kExitUsage;
  }

  for (std::size_t i = 0; i < bevx_records_count(records.get()); ++i) {
    bevx_record r;
    bevx_records_get(records.get(), i, &r);
    std::fprintf(stderr, "%-6s %-17s median %10.3f ms  p10 %10.3f ms  p90 %10.3f ms  params %" PRIu64 "\n",
                 r.setting, r.backend, r.median_s * 1e3, r.p10_s * 1e3, r.p90_s * 1e3,
                 r.intermediate_params);
  }
  return 0;
}

struct CheckArgs {
  std::string config;
  unsigned trials = 50;
  std::uint64_t seed = 7;
  bool corrupt_ring = false;
  bool zero_features = false;
  bool quiet = false;
};

int cmd_check(const CheckArgs& args) {
  bevx_status status;
  ScenePtr scene = load(args.config, &status);
  if (status != BEVX_OK) return report_error(status);

  bevx_check_options opts;
  bevx_check_options_init(&opts);
  opts.trials = args.trials;
  opts.seed = args.seed;
  opts.corrupt_ring = args.corrupt_ring ? 1 : 0;
  opts.zero_features = args.zero_features ? 1 : 0;

  bevx_check_report* raw = nullptr;
  status = bevx_check_run(scene.get(), &opts, &raw);
  ReportPtr report(raw);
  if (status != BEVX_OK) return report_error(status);

  char* text_raw = nullptr;
  if ((status = bevx_check_text(report.get(), &text_raw)) != BEVX_OK) return report_error(status);
  StringPtr text(text_raw);
  if (!args.quiet) std::fputs(text.get(), stdout);

  if (!bevx_check_passed(report.get())) {
    std::uint64_t seed = 0;
    if (bevx_check_failed_seed(report.get(), &seed)) {
      std::fprintf(stderr, "bench: check failed; first failing trial seed %" PRIu64 "\n", seed);
    }
    return kExitCheckFailed;
  }
  return 0;
}

int cmd_export(const std::string& config, const std::string& dir) {
  bevx_status status;
  ScenePtr scene = load(config, &status);
  if (status != BEVX_OK) return report_error(status);
  if ((status = bevx_scene_export_matrices(scene.get(), dir.c_str())) != BEVX_OK) {
    return report_error(status);
  }
  std::printf("wrote ftm.bxs, ring.bxs, ray.bxs, manifest.json to %s\n", dir.c_str());
  return 0;
}

int cmd_cost(std::uint64_t channels, std::uint64_t bins, std::uint64_t width, std::uint64_t bev_h,
             std::uint64_t bev_w) {
  bevx_cost_report r;
  bevx_status status = bevx_cost_model(channels, bins, width, bev_h, bev_w, &r);
  if (status != BEVX_OK) return report_error(status);
  std::printf("flops_composed=%" PRIu64 "\n", r.flops_composed);
  std::printf("flops_reformulated=%" PRIu64 "\n", r.flops_reformulated);
  std::printf("mem_params_full_ftm=%" PRIu64 "\n", r.mem_params_full_ftm);
  std::printf("mem_params_ringray=%" PRIu64 "\n", r.mem_params_ringray);
  std::printf("reduction_flops=%.6f\n", r.reduction_flops);
  std::printf("saving_memory=%.6f\n", r.saving_memory);
  std::printf("param_reduction=%.6f\n", r.param_reduction);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MatrixVT / Lift-Splat view-transformation benchmark"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "time backends across transformation settings");
  run_cmd->add_option("--config", run.config, "scene config (JSON)")->required();
  run_cmd->add_option("--settings", run.settings, "comma list of S1..S6 or 'scene'");
  run_cmd->add_option("--backends", run.backends, "comma list of scatter, ftm, ringray_composed, matrixvt");
  run_cmd->add_option("--repeats", run.repeats, "timed repetitions (>= 3)");
  run_cmd->add_option("--warmup", run.warmup, "untimed warm-up runs");
  run_cmd->add_option("--seed", run.seed, "input seed");
  run_cmd->add_option("--out", run.out, "CSV output path (stdout when omitted)");
  run_cmd->add_option("--json", run.json, "JSON output path");
  run_cmd->add_option("--cache-dir", run.cache_dir, "ring/ray/FTM cache directory");
  run_cmd->add_flag("--parallel", run.parallel, "prepare settings concurrently");

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "run the equivalence suite");
  check_cmd->add_option("--config", check.config, "scene config (JSON)")->required();
  check_cmd->add_option("--trials", check.trials, "random trials (>= 1)");
  check_cmd->add_option("--seed", check.seed, "base seed");
  check_cmd->add_flag("--corrupt-ring", check.corrupt_ring, "clear one ring entry (sensitivity test)");
  check_cmd->add_flag("--zero-features", check.zero_features, "use all-zero features");
  check_cmd->add_flag("--quiet", check.quiet, "suppress the per-trial report");

  std::string export_config, export_dir;
  auto* export_cmd = app.add_subcommand("export", "write FTM and ring/ray matrices as BXS1 files");
  export_cmd->add_option("--config", export_config, "scene config (JSON)")->required();
  export_cmd->add_option("--out-dir", export_dir, "output directory")->required();

  std::uint64_t channels = 80, bins = 112, width = 44, bev_h = 128, bev_w = 128;
  auto* cost_cmd = app.add_subcommand("cost", "evaluate the FLOPs/memory cost model");
  cost_cmd->add_option("--channels", channels);
  cost_cmd->add_option("--depth-bins", bins);
  cost_cmd->add_option("--feature-width", width);
  cost_cmd->add_option("--bev-h", bev_h);
  cost_cmd->add_option("--bev-w", bev_w);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*run_cmd) return cmd_run(run);
  if (*check_cmd) return cmd_check(check);
  if (*export_cmd) return cmd_export(export_config, export_dir);
  if (*cost_cmd) return cmd_cost(channels, bins, width, bev_h, bev_w);
  return kExitUsage;
}
