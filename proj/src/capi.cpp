#include "bevx/bevx.h"

#include <cstdlib>
#include <cstring>
#include <mutex>
#include <new>
#include <string>

#include "bevx/bench.hpp"
#include "bevx/error.hpp"
#include "bevx/io.hpp"
#include "bevx/reference.hpp"
#include "bevx/scene.hpp"
#include "bevx/transform.hpp"

struct bevx_scene {
  bevx::Scene scene;
  mutable std::once_flag rr_once;
  mutable std::optional<bevx::RingRayPair> rr;

  const bevx::RingRayPair& ring_ray() const {
    std::call_once(rr_once, [this] { rr = bevx::build_ring_ray(scene.frustum(), scene.grid()); });
    return *rr;
  }
};

struct bevx_records {
  std::vector<bevx::BenchRecord> records;
};

struct bevx_check_report {
  bevx::CheckReport report;
};

struct bevx_tensor {
  bevx::Tensor tensor;
};

namespace {

thread_local std::string g_last_error;

bevx_status fail(bevx_status status, const char* message) {
  g_last_error = message;
  return status;
}

template <class Fn>
bevx_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return BEVX_OK;
  } catch (const bevx::DimensionError& e) {
    return fail(BEVX_ERR_DIMENSION, e.what());
  } catch (const bevx::IndexError& e) {
    return fail(BEVX_ERR_INDEX, e.what());
  } catch (const bevx::GeometryError& e) {
    return fail(BEVX_ERR_GEOMETRY, e.what());
  } catch (const bevx::ValidationError& e) {
    return fail(BEVX_ERR_VALIDATION, e.what());
  } catch (const bevx::FormatError& e) {
    return fail(BEVX_ERR_FORMAT, e.what());
  } catch (const bevx::IoError& e) {
    return fail(BEVX_ERR_IO, e.what());
  } catch (const bevx::UsageError& e) {
    return fail(BEVX_ERR_USAGE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BEVX_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(BEVX_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BEVX_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define BEVX_REQUIRE(cond)                                                       \
  do {                                                                           \
    if (!(cond)) return fail(BEVX_ERR_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* bevx_last_error(void) { return g_last_error.c_str(); }

const char* bevx_status_name(bevx_status status) {
  switch (status) {
    case BEVX_OK: return "ok";
    case BEVX_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BEVX_ERR_DIMENSION: return "dimension error";
    case BEVX_ERR_INDEX: return "index error";
    case BEVX_ERR_GEOMETRY: return "geometry error";
    case BEVX_ERR_VALIDATION: return "validation error";
    case BEVX_ERR_FORMAT: return "format error";
    case BEVX_ERR_IO: return "io error";
    case BEVX_ERR_USAGE: return "usage error";
    case BEVX_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void bevx_string_free(char* s) { std::free(s); }

void bevx_bench_options_init(bevx_bench_options* options) {
  if (!options) return;
  *options = bevx_bench_options{"S1", "matrixvt,ftm", 20, 2, 7, 0, nullptr};
}

void bevx_check_options_init(bevx_check_options* options) {
  if (!options) return;
  *options = bevx_check_options{50, 7, 0, 0};
}

bevx_status bevx_scene_load(const char* path, bevx_scene** out) {
  BEVX_REQUIRE(path && out);
  return guarded([&] { *out = new bevx_scene{bevx::load_scene(path), {}, {}}; });
}

bevx_status bevx_scene_parse(const char* json_text, bevx_scene** out) {
  BEVX_REQUIRE(json_text && out);
  return guarded([&] { *out = new bevx_scene{bevx::parse_scene(json_text), {}, {}}; });
}

void bevx_scene_free(bevx_scene* scene) { delete scene; }

bevx_status bevx_scene_hash(const bevx_scene* scene, uint64_t* out) {
  BEVX_REQUIRE(scene && out);
  return guarded([&] { *out = bevx::scene_hash(scene->scene); });
}

bevx_status bevx_scene_export_matrices(const bevx_scene* scene, const char* dir) {
  BEVX_REQUIRE(scene && dir);
  return guarded([&] {
    const std::filesystem::path path(dir);
    bevx::save_ring_ray(path, scene->ring_ray(), bevx::scene_hash(scene->scene));
    bevx::io::save_sparse(path / "ftm.bxs", bevx::build_ftm(scene->scene.frustum(), scene->scene.grid()));
  });
}

bevx_status bevx_cost_model(uint64_t channels, uint64_t depth_bins, uint64_t feature_width,
                            uint64_t bev_h, uint64_t bev_w, bevx_cost_report* out) {
  BEVX_REQUIRE(out);
  return guarded([&] {
    const bevx::CostReport r = bevx::cost_model(channels, depth_bins, feature_width, bev_h, bev_w);
    *out = bevx_cost_report{r.flops_composed,     r.flops_reformulated, r.mem_params_full_ftm,
                            r.mem_params_ringray, r.reduction_flops,    r.saving_memory,
                            r.param_reduction};
  });
}

bevx_status bevx_bench_run(const bevx_scene* scene, const bevx_bench_options* options,
                           bevx_records** out) {
  BEVX_REQUIRE(scene && options && out && options->settings && options->backends);
  return guarded([&] {
    bevx::BenchOptions opts;
    opts.settings = bevx::resolve_settings(scene->scene, options->settings);
    opts.backends = bevx::parse_backends(options->backends);
    opts.repeats = options->repeats;
    opts.warmup = options->warmup;
    opts.seed = options->seed;
    opts.parallel = options->parallel != 0;
    if (options->cache_dir) opts.cache_dir = std::filesystem::path(options->cache_dir);
    *out = new bevx_records{bevx::run_bench(scene->scene, opts)};
  });
}

bevx_status bevx_records_parse_csv(const char* text, bevx_records** out) {
  BEVX_REQUIRE(text && out);
  return guarded([&] { *out = new bevx_records{bevx::parse_csv(text)}; });
}

size_t bevx_records_count(const bevx_records* records) {
  return records ? records->records.size() : 0;
}

bevx_status bevx_records_get(const bevx_records* records, size_t index, bevx_record* out) {
  BEVX_REQUIRE(records && out);
  if (index >= records->records.size()) return fail(BEVX_ERR_INDEX, "record index out of range");
  const bevx::BenchRecord& r = records->records[index];
  *out = bevx_record{r.setting.c_str(),
                     bevx::backend_name(r.backend).data(),
                     r.median_s,
                     r.p10_s,
                     r.p90_s,
                     r.intermediate_params,
                     r.repeats};
  g_last_error.clear();
  return BEVX_OK;
}

bevx_status bevx_records_csv(const bevx_records* records, char** out) {
  BEVX_REQUIRE(records && out);
  return guarded([&] { *out = dup_string(bevx::emit_csv(records->records)); });
}

bevx_status bevx_records_json(const bevx_records* records, char** out) {
  BEVX_REQUIRE(records && out);
  return guarded([&] { *out = dup_string(bevx::emit_json(records->records)); });
}

void bevx_records_free(bevx_records* records) { delete records; }

bevx_status bevx_check_run(const bevx_scene* scene, const bevx_check_options* options,
                           bevx_check_report** out) {
  BEVX_REQUIRE(scene && options && out);
  return guarded([&] {
    bevx::CheckOptions opts;
    opts.trials = options->trials;
    opts.seed = options->seed;
    opts.corrupt_ring = options->corrupt_ring != 0;
    opts.zero_features = options->zero_features != 0;
    *out = new bevx_check_report{bevx::run_check(scene->scene, opts)};
  });
}

int bevx_check_passed(const bevx_check_report* report) {
  return report && report->report.passed ? 1 : 0;
}

int bevx_check_failed_seed(const bevx_check_report* report, uint64_t* seed) {
  if (!report) return 0;
  auto failed = report->report.first_failed_seed();
  if (!failed) return 0;
  if (seed) *seed = *failed;
  return 1;
}

bevx_status bevx_check_text(const bevx_check_report* report, char** out) {
  BEVX_REQUIRE(report && out);
  return guarded([&] { *out = dup_string(report->report.text()); });
}

void bevx_check_report_free(bevx_check_report* report) { delete report; }

bevx_status bevx_tensor_create(const uint64_t* shape, size_t rank, const float* data,
                               bevx_tensor** out) {
  BEVX_REQUIRE(shape && data && out && rank > 0);
  return guarded([&] {
    bevx::Shape s(shape, shape + rank);
    const std::size_t n = bevx::element_count(s);
    *out = new bevx_tensor{bevx::Tensor(std::move(s), std::vector<float>(data, data + n))};
  });
}

bevx_status bevx_tensor_load(const char* path, bevx_tensor** out) {
  BEVX_REQUIRE(path && out);
  return guarded([&] { *out = new bevx_tensor{bevx::io::load_tensor(path)}; });
}

bevx_status bevx_tensor_save(const bevx_tensor* tensor, const char* path) {
  BEVX_REQUIRE(tensor && path);
  return guarded([&] { bevx::io::save_tensor(path, tensor->tensor); });
}

size_t bevx_tensor_rank(const bevx_tensor* tensor) { return tensor ? tensor->tensor.rank() : 0; }

uint64_t bevx_tensor_dim(const bevx_tensor* tensor, size_t axis) {
  if (!tensor || axis >= tensor->tensor.rank()) return 0;
  return tensor->tensor.dim(axis);
}

const float* bevx_tensor_data(const bevx_tensor* tensor) {
  return tensor ? tensor->tensor.data().data() : nullptr;
}

void bevx_tensor_free(bevx_tensor* tensor) { delete tensor; }

bevx_status bevx_transform_matrixvt(const bevx_scene* scene, const bevx_tensor* features,
                                    const bevx_tensor* depths, bevx_tensor** out) {
  BEVX_REQUIRE(scene && features && depths && out);
  return guarded([&] {
    *out = new bevx_tensor{bevx::vt_matrixvt(features->tensor, depths->tensor, scene->ring_ray())};
  });
}

}  // extern "C"
