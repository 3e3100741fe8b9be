#ifndef LOWLYING_H
#define LOWLYING_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LL_API __declspec(dllexport)
#else
#define LL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every fallible call. */
enum {
    LL_OK = 0,
    LL_ERR_DOMAIN = 1,   /* precondition, unstable count, insufficient data */
    LL_ERR_BUDGET = 2,   /* request beyond the configured work or memory limits */
    LL_ERR_NETWORK = 3,  /* transport, payload schema, or rejected external data */
    LL_ERR_INVALID = 4,  /* null handle, unknown key or identifier */
    LL_ERR_INTERNAL = 5
};

typedef struct ll_context ll_context;
typedef struct ll_weight ll_weight;
typedef struct ll_testfn ll_testfn;
typedef struct ll_table ll_table;

LL_API const char* ll_version(void);

/* context: thread count, option store, last error message */
LL_API int ll_context_create(ll_context** out);
LL_API void ll_context_destroy(ll_context* ctx);
LL_API int ll_context_set_threads(ll_context* ctx, unsigned threads);
/* Keys: the database client keys (api_base_url, maass_query_path, newform_query_path,
   zeros_query_path, field names, cache_dir, offline) and level_one_c_max. */
LL_API int ll_context_set_option(ll_context* ctx, const char* key, const char* value);
LL_API const char* ll_last_error(const ll_context* ctx);

/* spectral weights */
LL_API int ll_weight_create(ll_context* ctx, const char* id, double width, ll_weight** out); /* id: "gaussian" */
LL_API void ll_weight_destroy(ll_weight* w);
LL_API int ll_weight_eval(const ll_weight* w, double re, double im, double* out_re, double* out_im);
LL_API const char* ll_weight_id(const ll_weight* w);

/* test functions; id: "triangle" or "bump" */
LL_API int ll_testfn_create(ll_context* ctx, const char* id, double sigma, ll_testfn** out);
LL_API void ll_testfn_destroy(ll_testfn* f);
LL_API int ll_testfn_phi(const ll_testfn* f, double x, double* out);
LL_API int ll_testfn_phi_hat(const ll_testfn* f, double u, double* out);
LL_API const char* ll_testfn_id(const ll_testfn* f);

/* string tables for list-valued results */
LL_API size_t ll_table_rows(const ll_table* t);
LL_API size_t ll_table_cols(const ll_table* t);
LL_API const char* ll_table_column(const ll_table* t, size_t col);
LL_API const char* ll_table_cell(const ll_table* t, size_t row, size_t col);
LL_API void ll_table_destroy(ll_table* t);

/* one-level density from the geometric side */
typedef struct {
    int64_t N;
    double sigma;
    int64_t c_max;
    double main_terms;
    double kloosterman_term;
    double eisenstein_term;
    double omega_star;
    double density_value;
    double ks_prediction;
    double deviation;
    double tail_bound;
    uint64_t prime_powers;
} ll_density_report;

LL_API int ll_density(ll_context* ctx, const ll_weight* h, const ll_testfn* phi, int64_t N, int64_t c_max,
                      ll_density_report* out);

typedef struct {
    double diagonal;
    double eisenstein;
    double kloosterman;
    double tail_bound;
    double total;
    double level_one_total;
    double delta_star;
    double omega_geometric;
    double omega_integral;
} ll_kuznetsov_report;

LL_API int ll_kuznetsov_check(ll_context* ctx, const ll_weight* h, int64_t m, int64_t n, int64_t N, int64_t c_max,
                              ll_kuznetsov_report* out);

typedef struct {
    double integral;
    double series;
    double evaluator;
    double slope_constant;
} ll_hplus_report;

LL_API int ll_hplus(ll_context* ctx, const ll_weight* h, double x, ll_hplus_report* out);

/* Mellin transforms: kind 0 = Maass kernel (uses h), 1 = holomorphic J_{k-1} (h may be null) */
typedef struct {
    int kind;
    int weight;
    double scale;
    double c;
} ll_mellin_shape;

LL_API int ll_mellin(ll_context* ctx, const ll_weight* h, const ll_testfn* phi, const ll_mellin_shape* shape, double re,
                     double im, double* out_re, double* out_im);
LL_API int ll_mellin_invert(ll_context* ctx, const ll_weight* h, const ll_testfn* phi, const ll_mellin_shape* shape,
                            double x, double t_max, int panels, double* inverted, double* target);

typedef struct {
    double max_residual;
    int64_t worst_n;
    int integer_part_is_moebius;
} ll_hb_report;

LL_API int ll_hb_verify(ll_context* ctx, int64_t n_max, int64_t z, int K, ll_hb_report* out);

typedef struct {
    uint64_t tuples;
    uint64_t greedy_failures;
    uint64_t invalid_witnesses;
    uint64_t oracle_failures;
    uint64_t case_a;
    uint64_t case_b;
} ll_split_summary;

/* weight 0 selects the Maass thresholds, an even k >= 2 the holomorphic ones */
LL_API int ll_split_exhaustive(ll_context* ctx, int grid, double epsilon, int max_active, int weight, ll_split_summary* out);
LL_API int ll_split_random(ll_context* ctx, uint64_t count, double epsilon, uint64_t seed, int grid, int weight,
                           ll_split_summary* out);
/* which: 0 = A, 1 = B. On entry *subset_len is the capacity of subset; on return the case-A subset length.
   pair receives the case-B pair. Indices are 0-based. */
LL_API int ll_split_witness(ll_context* ctx, const double* exponents, size_t n, double epsilon, int weight, int* which,
                            size_t* subset, size_t* subset_len, size_t* pair);
LL_API int ll_theta_k(ll_context* ctx, int k, double* out);

typedef struct {
    uint64_t trials;
    uint64_t violations;
    double max_ratio;
} ll_lsieve_summary;

LL_API int ll_lsieve_check(ll_context* ctx, int64_t d, const double* re, const double* im, size_t X, double* lhs, double* rhs);
LL_API int ll_lsieve_sweep(ll_context* ctx, uint64_t trials, int64_t d_max, int64_t X_max, uint64_t seed,
                           ll_lsieve_summary* out);

typedef struct {
    double lhs;
    double ratio;
    double tail_bound;
} ll_fourth_moment_report;

/* kind: 0 = one, 1 = moebius, 2 = log */
LL_API int ll_fourth_moment(ll_context* ctx, int64_t d, int64_t X, int kind, double t_max, double panel_width,
                            double log_power, ll_fourth_moment_report* out);

typedef struct {
    int64_t lhs;
    double rhs;
    int64_t characters;
    int64_t line_count;
} ll_grand_density_report;

LL_API int ll_grand_density(ll_context* ctx, int64_t Q, int64_t k, double T, double beta, double log_power,
                            ll_grand_density_report* out);

typedef struct {
    int box_count;
    int line_count;
    int line_box_disagree;
    double final_step;
} ll_zero_report;

/* characters are addressed by modulus and their index in the group enumeration */
LL_API int ll_character_count(ll_context* ctx, int64_t q, size_t* count);
LL_API int ll_characters(ll_context* ctx, int64_t q, int primitive_only, ll_table** out);
LL_API int ll_zero_count(ll_context* ctx, int64_t q, size_t index, double beta, double T, ll_zero_report* out);
LL_API int ll_fe_residual(ll_context* ctx, int64_t q, size_t index, double re, double im, double* out);

/* external data; kind 0 = Maass, 1 = holomorphic */
LL_API int ll_fetch(ll_context* ctx, int kind, int64_t level, int64_t count, int64_t n_max, ll_table** out);

typedef struct {
    double zero_side;
    double prime_side;
    double gap;
    double truncation;
    double archimedean;
    double prime_power_correction;
    double completed_gap;
    uint64_t zeros_used;
} ll_explicit_formula_report;

/* runs the check on the form at position `form` of the fetch result */
LL_API int ll_explicit_formula(ll_context* ctx, int kind, int64_t level, int64_t form, int64_t n_max, const ll_testfn* phi,
                               double X, uint64_t max_zeros, ll_explicit_formula_report* out);

#ifdef __cplusplus
}
#endif

#endif
