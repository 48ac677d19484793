/* C interface to the forced-oscillation source locator.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a fosl_status; on failure fosl_last_error()
 * describes the problem (thread-local, valid until the next call on that
 * thread). Matrices are row-major: element (k, j) of an m x r block is at
 * k * r + j. Strings returned through char** are released with fosl_string_free.
 */
#ifndef FOSL_FOSL_H
#define FOSL_FOSL_H

#include <stddef.h>
#include <stdint.h>

#if defined(FOSL_BUILDING_LIBRARY)
#define FOSL_API __attribute__((visibility("default")))
#else
#define FOSL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fosl_status {
  FOSL_OK = 0,
  FOSL_ERR_INVALID_ARGUMENT = 1,
  FOSL_ERR_NON_UNIFORM_SAMPLING = 2,
  FOSL_ERR_SHAPE_MISMATCH = 3,
  FOSL_ERR_TOO_SHORT = 4,
  FOSL_ERR_PARSE = 5,
  FOSL_ERR_UNIT = 6,
  FOSL_ERR_IO = 7,
  FOSL_ERR_NO_CANDIDATES = 8,
  FOSL_ERR_RANK_DEFICIENT = 9,
  FOSL_ERR_UNLOCATABLE = 10,
  FOSL_ERR_DIVERGED = 11,
  FOSL_ERR_NO_EQUILIBRIUM = 12,
  FOSL_ERR_NOT_AN_EQUILIBRIUM = 13,
  FOSL_ERR_SPECTRUM_TOO_SHORT = 14,
  FOSL_ERR_INTERNAL = 99
} fosl_status;

typedef enum fosl_verdict {
  FOSL_VERDICT_LOCATED = 0,
  FOSL_VERDICT_NO_SOURCE = 1,
  FOSL_VERDICT_NO_CANDIDATES = 2,
  FOSL_VERDICT_UNLOCATABLE = 3
} fosl_verdict;

typedef enum fosl_channels {
  FOSL_CHANNELS_SPEED = 0,
  FOSL_CHANNELS_ANGLE = 1,
  FOSL_CHANNELS_BOTH = 2
} fosl_channels;

typedef struct fosl_window fosl_window;
typedef struct fosl_config fosl_config;
typedef struct fosl_report fosl_report;
typedef struct fosl_scenario fosl_scenario;
typedef struct fosl_spectra fosl_spectra;

FOSL_API const char* fosl_version(void);
FOSL_API const char* fosl_last_error(void);
FOSL_API const char* fosl_status_name(fosl_status status);
FOSL_API void fosl_string_free(char* text);

/* Measurement windows. angles in rad, speeds in rad/s. */
FOSL_API fosl_status fosl_window_create(size_t samples, size_t machines, double sample_rate,
                                        const double* timestamps, const char* const* labels,
                                        const double* angles, const double* speeds,
                                        fosl_window** out);
FOSL_API fosl_status fosl_window_load_csv(const char* path, fosl_window** out);
FOSL_API fosl_status fosl_window_write_csv(const fosl_window* window, const char* path);
FOSL_API size_t fosl_window_samples(const fosl_window* window);
FOSL_API size_t fosl_window_machines(const fosl_window* window);
FOSL_API double fosl_window_sample_rate(const fosl_window* window);
/* NULL when index is out of range. */
FOSL_API const char* fosl_window_label(const fosl_window* window, size_t index);
/* Either output pointer may be NULL. Each needs samples * machines doubles. */
FOSL_API fosl_status fosl_window_copy_channels(const fosl_window* window, double* angles,
                                               double* speeds);
FOSL_API void fosl_window_free(fosl_window* window);

/* Pipeline configuration (JSON on disk). */
FOSL_API fosl_status fosl_config_default(fosl_config** out);
FOSL_API fosl_status fosl_config_load(const char* path, fosl_config** out);
FOSL_API fosl_status fosl_config_parse(const char* json_text, fosl_config** out);
FOSL_API fosl_status fosl_config_to_json(const fosl_config* config, char** out);
FOSL_API void fosl_config_free(fosl_config* config);

/* Runs the pipeline. The report is produced for every verdict; the status is
 * FOSL_ERR_NO_CANDIDATES or FOSL_ERR_UNLOCATABLE for those verdicts, FOSL_OK
 * otherwise. On any other error *out is NULL. A ROCOF derivative source reads
 * ROCOF columns stored with the window (CSV input). */
FOSL_API fosl_status fosl_locate(const fosl_window* window, const fosl_config* config,
                                 fosl_report** out);
FOSL_API fosl_verdict fosl_report_verdict(const fosl_report* report);
FOSL_API const char* fosl_verdict_name(fosl_verdict verdict);
FOSL_API size_t fosl_report_detection_count(const fosl_report* report);
/* Any output pointer may be NULL. machine stays valid for the report's lifetime. */
FOSL_API fosl_status fosl_report_detection(const fosl_report* report, size_t index,
                                           const char** machine, double* frequency_hz,
                                           double* zeta, int* rank);
FOSL_API size_t fosl_report_candidate_count(const fosl_report* report);
FOSL_API double fosl_report_candidate(const fosl_report* report, size_t index);
FOSL_API double fosl_report_elapsed(const fosl_report* report);
FOSL_API fosl_status fosl_report_to_json(const fosl_report* report, char** out);
FOSL_API fosl_status fosl_report_write(const fosl_report* report, const char* path);
FOSL_API void fosl_report_free(fosl_report* report);

/* Simulation scenarios (JSON). */
FOSL_API fosl_status fosl_scenario_load(const char* path, fosl_scenario** out);
FOSL_API fosl_status fosl_scenario_parse(const char* json_text, fosl_scenario** out);
FOSL_API fosl_status fosl_scenario_set_seed(fosl_scenario* scenario, uint64_t seed);
FOSL_API size_t fosl_scenario_machines(const fosl_scenario* scenario);
FOSL_API fosl_status fosl_simulate(const fosl_scenario* scenario, fosl_window** out);
/* Natural modes at the scenario's operating point, ascending in frequency.
 * Writes min(capacity, total) entries; *count receives the total. */
FOSL_API fosl_status fosl_modes(const fosl_scenario* scenario, double* frequency_hz,
                                double* damping_ratio, size_t capacity, size_t* count);
FOSL_API void fosl_scenario_free(fosl_scenario* scenario);

/* Per-channel single-sided amplitude spectra. */
FOSL_API fosl_status fosl_spectra_compute(const fosl_window* window, fosl_channels channels,
                                          fosl_spectra** out);
FOSL_API size_t fosl_spectra_count(const fosl_spectra* spectra);
FOSL_API fosl_status fosl_spectra_write_csv(const fosl_spectra* spectra, const char* path);
FOSL_API void fosl_spectra_free(fosl_spectra* spectra);

#ifdef __cplusplus
}
#endif

#endif
