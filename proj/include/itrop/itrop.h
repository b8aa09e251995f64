#ifndef ITROP_H
#define ITROP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ITROP_API __declspec(dllexport)
#else
#define ITROP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. 0-3 coincide with the CLI exit statuses. */
typedef enum itrop_status {
    ITROP_OK = 0,
    ITROP_ERR_CONFIG = 1,
    ITROP_DIVERGENCE = 2,
    ITROP_ASSUMPTION_VIOLATED = 3,
    ITROP_ERR_PARSE = 4,
    ITROP_ERR_VALIDATION = 5,
    ITROP_ERR_NONCONVERGENCE = 6,
    ITROP_ERR_IO = 7,
    ITROP_ERR_ARGUMENT = 8,
    ITROP_ERR_INTERNAL = 9
} itrop_status;

/* Message of the last failing call on this thread; never NULL. */
ITROP_API const char* itrop_last_error(void);
ITROP_API const char* itrop_version(void);

/* Optional overrides applied on top of a config file. Zero/NULL fields are ignored. */
typedef struct itrop_overrides {
    unsigned jobs;
    const char* output_dir;
    int has_seed;
    uint64_t seed;
} itrop_overrides;

/* Runs the experiment named by the config. Returns ITROP_OK, ITROP_DIVERGENCE
   (more than 1% of runs diverged) or ITROP_ASSUMPTION_VIOLATED on completion. */
ITROP_API itrop_status itrop_run_experiment(const char* config_path, const itrop_overrides* overrides);
/* Runs the assumption suite for the config's operator family. */
ITROP_API itrop_status itrop_run_checks(const char* config_path, const itrop_overrides* overrides);

/* family: "logistic" or "poisson". */
ITROP_API itrop_status itrop_gen_mdp(size_t num_states, size_t num_actions, double discount, uint64_t seed,
                                     const char* path);
ITROP_API itrop_status itrop_gen_dataset(const char* family, size_t num_samples, size_t dim, uint64_t seed,
                                         const char* path);

typedef struct itrop_mdp itrop_mdp;

ITROP_API itrop_status itrop_mdp_random(size_t num_states, size_t num_actions, double discount, uint64_t seed,
                                        itrop_mdp** out);
/* transition[(s*A + a)*S + s'], cost[s*A + a]. */
ITROP_API itrop_status itrop_mdp_create(size_t num_states, size_t num_actions, const double* transition,
                                        const double* cost, double discount, itrop_mdp** out);
ITROP_API itrop_status itrop_mdp_load(const char* path, itrop_mdp** out);
ITROP_API itrop_status itrop_mdp_save(const itrop_mdp* mdp, const char* path);
ITROP_API void itrop_mdp_free(itrop_mdp* mdp);
ITROP_API itrop_status itrop_mdp_dims(const itrop_mdp* mdp, size_t* num_states, size_t* num_actions,
                                      double* discount);
/* v and out have num_states entries. */
ITROP_API itrop_status itrop_mdp_bellman(const itrop_mdp* mdp, const double* v, double* out);
/* One realization of the empirical operator with n samples per (s,a),
   keyed by (seed, run, step). */
ITROP_API itrop_status itrop_mdp_empirical_bellman(const itrop_mdp* mdp, const double* v, size_t n, uint64_t seed,
                                                   uint64_t run, uint64_t step, double* out);
/* kind: 0 = value function (num_states entries), 1 = Q function (S*A entries). */
ITROP_API itrop_status itrop_mdp_solve(const itrop_mdp* mdp, int kind, double tol, double* out);

typedef struct itrop_dataset itrop_dataset;

ITROP_API itrop_status itrop_dataset_synth(const char* family, size_t num_samples, size_t dim, uint64_t seed,
                                           itrop_dataset** out);
ITROP_API itrop_status itrop_dataset_load(const char* path, const char* family, itrop_dataset** out);
ITROP_API itrop_status itrop_dataset_save(const itrop_dataset* data, const char* path);
ITROP_API void itrop_dataset_free(itrop_dataset* data);
ITROP_API itrop_status itrop_dataset_dims(const itrop_dataset* data, size_t* num_samples, size_t* dim);
/* Full-batch regularized loss and gradient; x and grad have dim entries. */
ITROP_API itrop_status itrop_dataset_loss(const itrop_dataset* data, double lambda, const double* x, double* loss);
ITROP_API itrop_status itrop_dataset_gradient(const itrop_dataset* data, double lambda, const double* x,
                                              double* grad);

/* 2|S||A| exp(-eps n / (|S| radius^2)), unclipped. */
ITROP_API double itrop_hoeffding_bound(size_t num_states, size_t num_actions, double eps, size_t n, double radius);

#ifdef __cplusplus
}
#endif

#endif
