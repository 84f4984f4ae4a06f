/* C interface to the bevx view-transformation library.
 *
 * Every function returns a bevx_status. On failure the message for the
 * calling thread is available from bevx_last_error() until the next call.
 * Objects are opaque handles released with their matching *_free function;
 * strings returned through char** are released with bevx_string_free. */
#ifndef BEVX_BEVX_H
#define BEVX_BEVX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BEVX_BUILDING_LIBRARY)
#    define BEVX_API __declspec(dllexport)
#  else
#    define BEVX_API __declspec(dllimport)
#  endif
#else
#  define BEVX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bevx_status {
  BEVX_OK = 0,
  BEVX_ERR_INVALID_ARGUMENT = 1, /* null handle or pointer */
  BEVX_ERR_DIMENSION = 2,
  BEVX_ERR_INDEX = 3,
  BEVX_ERR_GEOMETRY = 4,
  BEVX_ERR_VALIDATION = 5,
  BEVX_ERR_FORMAT = 6,
  BEVX_ERR_IO = 7,
  BEVX_ERR_USAGE = 8,
  BEVX_ERR_INTERNAL = 9
} bevx_status;

typedef struct bevx_scene bevx_scene;
typedef struct bevx_records bevx_records;
typedef struct bevx_check_report bevx_check_report;
typedef struct bevx_tensor bevx_tensor;

typedef struct bevx_cost_report {
  uint64_t flops_composed;
  uint64_t flops_reformulated;
  uint64_t mem_params_full_ftm;
  uint64_t mem_params_ringray;
  double reduction_flops;
  double saving_memory;
  double param_reduction;
} bevx_cost_report;

typedef struct bevx_record {
  const char* setting;  /* owned by the records handle */
  const char* backend;
  double median_s;
  double p10_s;
  double p90_s;
  uint64_t intermediate_params;
  uint64_t repeats;
} bevx_record;

typedef struct bevx_bench_options {
  const char* settings; /* comma list: S1..S6 or "scene" */
  const char* backends; /* comma list: scatter, ftm, ringray_composed, matrixvt */
  uint32_t repeats;
  uint32_t warmup;
  uint64_t seed;
  int parallel;          /* nonzero: prepare settings concurrently */
  const char* cache_dir; /* may be NULL */
} bevx_bench_options;

typedef struct bevx_check_options {
  uint32_t trials;
  uint64_t seed;
  int corrupt_ring;  /* nonzero: clear one ring entry before checking */
  int zero_features;
} bevx_check_options;

BEVX_API const char* bevx_last_error(void);
BEVX_API const char* bevx_status_name(bevx_status status);
BEVX_API void bevx_string_free(char* s);

BEVX_API void bevx_bench_options_init(bevx_bench_options* options);
BEVX_API void bevx_check_options_init(bevx_check_options* options);

/* Scene config (JSON). */
BEVX_API bevx_status bevx_scene_load(const char* path, bevx_scene** out);
BEVX_API bevx_status bevx_scene_parse(const char* json_text, bevx_scene** out);
BEVX_API void bevx_scene_free(bevx_scene* scene);
BEVX_API bevx_status bevx_scene_hash(const bevx_scene* scene, uint64_t* out);

/* Writes ftm.bxs, ring.bxs, ray.bxs and manifest.json into dir. */
BEVX_API bevx_status bevx_scene_export_matrices(const bevx_scene* scene, const char* dir);

BEVX_API bevx_status bevx_cost_model(uint64_t channels, uint64_t depth_bins,
                                     uint64_t feature_width, uint64_t bev_h, uint64_t bev_w,
                                     bevx_cost_report* out);

BEVX_API bevx_status bevx_bench_run(const bevx_scene* scene, const bevx_bench_options* options,
                                    bevx_records** out);
BEVX_API bevx_status bevx_records_parse_csv(const char* text, bevx_records** out);
BEVX_API size_t bevx_records_count(const bevx_records* records);
BEVX_API bevx_status bevx_records_get(const bevx_records* records, size_t index, bevx_record* out);
BEVX_API bevx_status bevx_records_csv(const bevx_records* records, char** out);
BEVX_API bevx_status bevx_records_json(const bevx_records* records, char** out);
BEVX_API void bevx_records_free(bevx_records* records);

BEVX_API bevx_status bevx_check_run(const bevx_scene* scene, const bevx_check_options* options,
                                    bevx_check_report** out);
BEVX_API int bevx_check_passed(const bevx_check_report* report);
/* Returns 0 and leaves *seed untouched when every trial passed. */
BEVX_API int bevx_check_failed_seed(const bevx_check_report* report, uint64_t* seed);
BEVX_API bevx_status bevx_check_text(const bevx_check_report* report, char** out);
BEVX_API void bevx_check_report_free(bevx_check_report* report);

/* "BXT1" tensor files. */
BEVX_API bevx_status bevx_tensor_create(const uint64_t* shape, size_t rank, const float* data,
                                        bevx_tensor** out);
BEVX_API bevx_status bevx_tensor_load(const char* path, bevx_tensor** out);
BEVX_API bevx_status bevx_tensor_save(const bevx_tensor* tensor, const char* path);
BEVX_API size_t bevx_tensor_rank(const bevx_tensor* tensor);
BEVX_API uint64_t bevx_tensor_dim(const bevx_tensor* tensor, size_t axis);
BEVX_API const float* bevx_tensor_data(const bevx_tensor* tensor);
BEVX_API void bevx_tensor_free(bevx_tensor* tensor);

/* F_BEV for W x C features and W x N_d depths on the scene's own geometry. */
BEVX_API bevx_status bevx_transform_matrixvt(const bevx_scene* scene, const bevx_tensor* features,
                                             const bevx_tensor* depths, bevx_tensor** out);

#ifdef __cplusplus
}
#endif

#endif /* BEVX_BEVX_H */
