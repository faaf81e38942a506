#ifndef HBSHIP_H
#define HBSHIP_H

/* C interface of the hbship library. Objects are opaque handles created by the
 * library and released with the matching *_free function (free accepts NULL).
 * Every fallible call returns an hbs_status; on failure hbs_last_error() gives a
 * message for the calling thread. Strings returned by accessors stay valid until
 * the owning handle is freed. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HBS_API __declspec(dllexport)
#else
#define HBS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hbs_status {
  HBS_OK = 0,
  HBS_ERR_INVALID_ARGUMENT = 1, /* bad argument or configuration value */
  HBS_ERR_IO = 2,               /* file or directory could not be read or written */
  HBS_ERR_DATA = 3,             /* malformed or invariant-violating input data */
  HBS_ERR_NOT_FOUND = 4,        /* unknown ship, missing parameter or white-box input */
  HBS_ERR_INTERNAL = 5
} hbs_status;

HBS_API const char* hbs_last_error(void);
HBS_API const char* hbs_status_name(hbs_status status);
HBS_API const char* hbs_version(void);

/* ---- physics ---------------------------------------------------------- */

/* Missing optional fields are NaN. */
typedef struct hbs_vessel {
  double gross_tonnage;
  double lwl;
  double breadth;
  double draft;
  double wetted_surface;
  double residual_coeff;
} hbs_vessel;

HBS_API hbs_status hbs_greybox_power(double a, double b, double speed, double wind_speed, double wind_angle,
                                     double* out);
HBS_API hbs_status hbs_ittc_friction_coefficient(double reynolds, double* out);
HBS_API hbs_status hbs_steam2_power(const hbs_vessel* vessel, double density, double kinematic_viscosity,
                                    double speed, double* out);

/* ---- string lists ----------------------------------------------------- */

typedef struct hbs_strings hbs_strings;
HBS_API size_t hbs_strings_size(const hbs_strings* list);
HBS_API const char* hbs_strings_get(const hbs_strings* list, size_t i);
HBS_API void hbs_strings_free(hbs_strings* list);

/* ---- configuration ---------------------------------------------------- */

/* Pipeline settings. Keys are "section.key" as in the INI file, e.g.
 * "sampler.chains" or "paths.output_dir". Later calls override earlier values. */
typedef struct hbs_config hbs_config;
HBS_API hbs_status hbs_config_new(hbs_config** out);
HBS_API hbs_status hbs_config_load(const char* path, hbs_config** out);
HBS_API hbs_status hbs_config_set(hbs_config* cfg, const char* key, const char* value);
HBS_API void hbs_config_free(hbs_config* cfg);

/* Synthetic fleet generator settings ([fleet], [hyper], [noise], [speed], [wind]). */
typedef struct hbs_fleet_spec hbs_fleet_spec;
HBS_API hbs_status hbs_fleet_spec_new(hbs_fleet_spec** out);
HBS_API hbs_status hbs_fleet_spec_load(const char* path, hbs_fleet_spec** out);
HBS_API hbs_status hbs_fleet_spec_set(hbs_fleet_spec* spec, const char* key, const char* value);
HBS_API void hbs_fleet_spec_free(hbs_fleet_spec* spec);

/* ---- pipeline steps --------------------------------------------------- */

/* Writes telemetry.csv, characteristics.csv and truth.csv into out_dir.
 * `summary` (optional) receives one line per ship. */
HBS_API hbs_status hbs_generate(const hbs_fleet_spec* spec, const char* out_dir, int make_dirs,
                                hbs_strings** summary);

/* paths.telemetry -> output_dir/noon.csv. */
HBS_API hbs_status hbs_aggregate(const hbs_config* cfg, int make_dirs, size_t* n_reports);

typedef enum hbs_fit_mode { HBS_FIT_HIERARCHICAL = 0, HBS_FIT_INDEPENDENT = 1 } hbs_fit_mode;

typedef struct hbs_posterior hbs_posterior;

/* Fits and writes output_dir/posterior.csv and output_dir/fit_report.csv.
 * `out` (optional) receives the posterior with diagnostics. */
HBS_API hbs_status hbs_fit(const hbs_config* cfg, hbs_fit_mode mode, int make_dirs, hbs_posterior** out);

HBS_API hbs_status hbs_posterior_load(const char* path, hbs_posterior** out);
HBS_API hbs_status hbs_posterior_write(const hbs_posterior* post, const char* path);
HBS_API size_t hbs_posterior_n_params(const hbs_posterior* post);
HBS_API size_t hbs_posterior_n_chains(const hbs_posterior* post);
HBS_API size_t hbs_posterior_n_draws(const hbs_posterior* post);
HBS_API const char* hbs_posterior_param_name(const hbs_posterior* post, size_t param);
HBS_API hbs_status hbs_posterior_value(const hbs_posterior* post, size_t chain, size_t draw, size_t param,
                                       double* out);
/* Split R-hat and effective sample size of one parameter (computed on demand). */
HBS_API hbs_status hbs_posterior_rhat(const hbs_posterior* post, size_t param, double* out);
HBS_API hbs_status hbs_posterior_ess(const hbs_posterior* post, size_t param, double* out);
HBS_API size_t hbs_posterior_n_warnings(const hbs_posterior* post);
HBS_API const char* hbs_posterior_warning(const hbs_posterior* post, size_t i);
HBS_API void hbs_posterior_free(hbs_posterior* post);

/* ---- prediction ------------------------------------------------------- */

typedef struct hbs_envelope hbs_envelope;

/* ship_id != NULL: ship-specific envelope; otherwise prior-based at gross_tonnage. */
HBS_API hbs_status hbs_predict(const hbs_config* cfg, const char* ship_id, double gross_tonnage,
                               hbs_envelope** out);
/* As hbs_predict, and writes output_dir/envelope_<target>.csv. `path` (optional)
 * receives the written file name as a one-element list. */
HBS_API hbs_status hbs_run_predict(const hbs_config* cfg, const char* ship_id, double gross_tonnage, int make_dirs,
                                   hbs_envelope** out, hbs_strings** path);

HBS_API size_t hbs_envelope_size(const hbs_envelope* env);
/* row = {speed, median, p25, p75, p2.5, p97.5} */
HBS_API hbs_status hbs_envelope_row(const hbs_envelope* env, size_t i, double row[6]);
HBS_API int hbs_envelope_nested(const hbs_envelope* env);
HBS_API hbs_status hbs_envelope_write(const hbs_envelope* env, const char* path);
HBS_API void hbs_envelope_free(hbs_envelope* env);

/* ---- diagnostics and comparison --------------------------------------- */

typedef struct hbs_comparison hbs_comparison;

typedef struct hbs_comparison_row {
  const char* ship_id;
  const char* model_tag; /* steam2 | prior-based | ship-specific */
  double median_w;       /* NaN when status is "unavailable" */
  double p025_w;
  double p975_w;
  double rmse_w;
  const char* status;    /* ok | unavailable | heuristic_wetted_surface */
} hbs_comparison_row;

/* residuals.csv, quantiles.csv, kde/ and lowess/ trees in output_dir. */
HBS_API hbs_status hbs_diagnose(const hbs_config* cfg, int make_dirs, hbs_comparison** out);
/* output_dir/compare.csv. */
HBS_API hbs_status hbs_compare(const hbs_config* cfg, int make_dirs, hbs_comparison** out);

HBS_API size_t hbs_comparison_size(const hbs_comparison* table);
HBS_API hbs_status hbs_comparison_row_at(const hbs_comparison* table, size_t i, hbs_comparison_row* row);
HBS_API void hbs_comparison_free(hbs_comparison* table);

#ifdef __cplusplus
}
#endif

#endif /* HBSHIP_H */
