/* haptifish: doctor-fish haptics simulator, C interface.
 *
 * Every call returns an hf_status. On failure hf_last_error() describes the
 * problem; the string is per thread and valid until the next failing call on
 * that thread. Strings handed out through char** are freed with
 * hf_string_free. Handles are not thread safe. */
#ifndef HAPTIFISH_H
#define HAPTIFISH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define HF_API __attribute__((visibility("default")))
#else
#define HF_API
#endif

typedef enum hf_status {
  HF_OK = 0,
  HF_ERR_INVALID_ARGUMENT = 1,
  HF_ERR_PARSE = 2,
  HF_ERR_CONFIG = 3,
  HF_ERR_IO = 4,
  HF_ERR_FORMAT = 5,
  HF_ERR_UNSUPPORTED_VERSION = 6,
  HF_ERR_TRUNCATED = 7,
  HF_ERR_INFEASIBLE_SCHEDULE = 8,
  HF_ERR_MEASUREMENT = 9,
  HF_ERR_RUNTIME = 10,
  HF_ERR_INTERNAL = 11
} hf_status;

typedef struct hf_vec3 {
  double x, y, z;
} hf_vec3;

typedef struct hf_scenario hf_scenario;
typedef struct hf_array hf_array;
typedef struct hf_service hf_service;

HF_API const char *hf_version(void);
HF_API const char *hf_status_name(hf_status status);
HF_API const char *hf_last_error(void);
HF_API void hf_string_free(char *s);

/* Scenarios */
HF_API hf_status hf_scenario_load(const char *path, hf_scenario **out);
HF_API hf_status hf_scenario_parse(const char *json, hf_scenario **out);
HF_API hf_status hf_scenario_baseline(hf_scenario **out);
HF_API hf_status hf_scenario_apply_preset(hf_scenario *scenario, int preset_id);
HF_API hf_status hf_scenario_set_seed(hf_scenario *scenario, uint64_t seed);
HF_API hf_status hf_scenario_set_duration(hf_scenario *scenario, double seconds);
HF_API hf_status hf_scenario_set_clustering(hf_scenario *scenario, int enabled, double distance_mm);
HF_API hf_status hf_scenario_to_json(const hf_scenario *scenario, char **out);
HF_API void hf_scenario_free(hf_scenario *scenario);

/* Batch runs */
typedef struct hf_run_summary {
  uint64_t ticks;
  uint64_t events;
  uint64_t frames;
  uint64_t non_idle_frames;
  uint64_t schedule_rebuilds;
  double mean_contacts;
  double mean_clusters;
  uint32_t max_contacts;
  uint32_t max_clusters;
} hf_run_summary;

/* out_dir may be NULL (nothing written). With emit_frames == 0 no device
 * frames are built, which is much faster. */
HF_API hf_status hf_simulate(const hf_scenario *scenario, const char *out_dir, int emit_frames,
                             hf_run_summary *out);

/* CSV (t_ms,kind,x,y,z,amplitude) of one STM cycle planned from the clusters
 * present after `tick` simulation ticks. */
HF_API hf_status hf_schedule_dump(const hf_scenario *scenario, uint64_t tick, char **csv_out);

/* Link distance whose mean cluster count over seeds 1..seed_count is closest
 * to target_clusters. The scenario's own clustering flag is ignored. */
HF_API hf_status hf_calibrate_link_distance(const hf_scenario *scenario, double target_clusters,
                                            uint32_t seed_count, double *link_distance_mm,
                                            double *mean_clusters);

/* Transducer arrays */
HF_API hf_status hf_array_default(hf_array **out);
HF_API hf_status hf_array_load(const char *path, hf_array **out);
HF_API hf_status hf_array_from_scenario(const hf_scenario *scenario, hf_array **out);
HF_API size_t hf_array_element_count(const hf_array *array);
HF_API void hf_array_free(hf_array *array);

/* Focusing phases and amplitudes; both buffers hold element_count values. */
HF_API hf_status hf_focus(const hf_array *array, hf_vec3 target, double amplitude_scale,
                          double *phases, double *amplitudes, size_t count);
HF_API hf_status hf_pressure(const hf_array *array, const double *phases,
                             const double *amplitudes, size_t count, hf_vec3 probe,
                             double *magnitude);
HF_API hf_status hf_focal_radius(const hf_array *array, hf_vec3 target, double *radius_mm);
/* CSV (x,y,z,re,im,abs) over a square grid in the plane z = target.z. */
HF_API hf_status hf_field_scan(const hf_array *array, hf_vec3 target, double extent_mm,
                               double step_mm, char **csv_out);

/* Device frames: CSV (timestamp,pressure) of |p| at probe for each frame of a
 * recorded stream. The array must match the frame element count. */
HF_API hf_status hf_replay(const hf_array *array, const char *stream_path, hf_vec3 probe,
                           char **csv_out);
/* Encodes one frame: phases in radians, amplitudes in [0,1]. *size_out
 * receives the byte count; out may be NULL to query it. */
HF_API hf_status hf_encode_frame(uint32_t timestamp, const double *phases,
                                 const double *amplitudes, size_t count, uint8_t *out,
                                 size_t capacity, size_t *size_out);
HF_API hf_status hf_decode_frame(const uint8_t *bytes, size_t size, uint32_t *timestamp,
                                 double *phases, double *amplitudes, size_t capacity,
                                 size_t *count_out);

/* Live service: WebSocket endpoint /sim. port 0 picks a free port. */
HF_API hf_status hf_service_create(const hf_scenario *scenario, const char *address,
                                   uint16_t port, double snapshot_hz, hf_service **out);
HF_API hf_status hf_service_start(hf_service *service);
HF_API uint16_t hf_service_port(const hf_service *service);
HF_API hf_status hf_service_stop(hf_service *service);
HF_API void hf_service_free(hf_service *service);

#ifdef __cplusplus
}
#endif

#endif
