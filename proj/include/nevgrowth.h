#ifndef NEVGROWTH_H
#define NEVGROWTH_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define NG_API __declspec(dllexport)
#else
#define NG_API __attribute__((visibility("default")))
#endif

typedef enum ng_status {
    NG_OK = 0,
    NG_ERR_INVALID_ARGUMENT = 1, /* malformed input, unknown name, missing parameter */
    NG_ERR_DOMAIN = 2,           /* parameter outside its admissible range */
    NG_ERR_PARSE = 3,            /* JSON could not be read */
    NG_ERR_DEGENERATE = 4,       /* numerical degeneracy, e.g. a bridge with vanishing angle jumps */
    NG_ERR_INTERNAL = 5
} ng_status;

typedef enum ng_format { NG_FORMAT_CSV = 0, NG_FORMAT_JSON = 1 } ng_format;

/* A Hamiltonian: stored lists, a bridged Jacobi matrix, or a named preset family. */
typedef struct ng_model ng_model;

typedef struct ng_grid {
    double r_lo;
    double r_hi;
    unsigned per_decade;
} ng_grid;

typedef struct ng_options {
    unsigned threads;       /* 0 = hardware concurrency */
    unsigned long long seed;
    size_t bound_intervals; /* truncation used for bound curves of preset families */
    double rel_tol;         /* truncation rule for unbounded families */
    size_t max_intervals;   /* budget for unbounded families */
} ng_options;

NG_API void ng_options_default(ng_options* out);

/* Message of the last failed call on this thread; empty after a success. */
NG_API const char* ng_last_error(void);
NG_API const char* ng_status_name(ng_status s);
/* Frees strings returned through char** out-parameters. */
NG_API void ng_string_free(char* s);

/* {"lengths": [...], "angles": [...]} or {"a": [...], "b": [...]}. */
NG_API ng_status ng_model_from_json(const char* json, ng_model** out);
NG_API ng_status ng_model_from_lists(const double* lengths, const double* angles, size_t n, ng_model** out);
NG_API ng_status ng_model_from_preset(const char* preset, ng_model** out);
NG_API void ng_model_free(ng_model* m);
/* Intervals stored in the model; 0 for unbounded families. */
NG_API size_t ng_model_size(const ng_model* m);
/* Family description as JSON, including the preset string for replay. */
NG_API ng_status ng_model_describe(const ng_model* m, char** json);
/* First n intervals as {"lengths", "angles"} JSON. */
NG_API ng_status ng_model_hamiltonian_json(const ng_model* m, size_t n, char** json);

/* Jacobi JSON to Hamiltonian JSON; also reports the round-trip relative error. */
NG_API ng_status ng_convert_jacobi(const char* jacobi_json, char** hamiltonian_json, double* round_trip_error);

/* log|w22(ir)| for a single r, over all stored intervals (or the truncation rule for families). */
NG_API ng_status ng_log_abs_w22(const ng_model* m, double r, double* out);

/* Table r, logw22, N_used, flags. */
NG_API ng_status ng_eval(const ng_model* m, const ng_grid* grid, const ng_options* opt, ng_format fmt, char** out);

/* One value column per method in a list such as "lower-count:s=2,upper-k89:alpha=2,beta=1", plus flags. */
NG_API ng_status ng_bounds(const ng_model* m, const char* methods, const ng_grid* grid, const ng_options* opt,
                           ng_format fmt, char** out);

/* Sandwich report (JSON) and curves (CSV) of a preset family. */
NG_API ng_status ng_experiment(const char* preset, const ng_grid* grid, const ng_options* opt, char** report_json,
                               char** curves_csv);

/* Convergence exponent of a positive sequence; method "ratio-limsup" or "counting-slope". */
NG_API ng_status ng_sequence_exponent(const double* values, size_t n, const char* method, double* out);
/* Exponents of b^(s) for s = 2, 3, 4 of the first n intervals, as JSON. */
NG_API ng_status ng_model_exponents(const ng_model* m, size_t n, const char* method, char** json);

#ifdef __cplusplus
}
#endif

#endif
