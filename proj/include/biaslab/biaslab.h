#ifndef BIASLAB_BIASLAB_H
#define BIASLAB_BIASLAB_H

/* C interface to the bias laboratory. Every fallible call returns a status;
 * on failure biaslab_last_error() describes the problem for the calling
 * thread. Strings handed out by the library are released with
 * biaslab_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BIASLAB_API __declspec(dllexport)
#else
#define BIASLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum biaslab_status {
    BIASLAB_OK = 0,
    BIASLAB_ERR_RUNTIME = 1,
    BIASLAB_ERR_CONFIG = 2,
    BIASLAB_ERR_ARGUMENT = 3
} biaslab_status;

typedef struct biaslab_config biaslab_config;
typedef struct biaslab_env biaslab_env;

BIASLAB_API const char* biaslab_version(void);
BIASLAB_API const char* biaslab_last_error(void);
BIASLAB_API void biaslab_string_free(char* s);

/* Closed-form expected error of a target rule ("ddpg", "td3", "tcd3",
 * "wd3", "tadd") with equal means mu and pairwise deviation theta. beta is
 * read by wd3 and tadd only. */
BIASLAB_API biaslab_status biaslab_expected_error(const char* rule, double beta, double mu, double theta,
                                                  double* out);

/* E[min(N1, N2)] for two correlated Gaussians with arbitrary means. */
BIASLAB_API biaslab_status biaslab_expected_min2(double mu1, double mu2, double sigma1, double sigma2, double rho,
                                                 double* out);

/* Monte Carlo estimate of an order statistic ("single", "min2", "max2",
 * "max3", "minmax", "weighted_twin", "weighted_third") over n_vars (2 or 3)
 * correlated Gaussians. */
BIASLAB_API biaslab_status biaslab_mc_oracle(const double* mu, const double* sigma, size_t n_vars, double rho,
                                             const char* statistic, double beta, uint64_t n, uint64_t seed,
                                             double* mean, double* standard_error);

BIASLAB_API biaslab_status biaslab_config_load(const char* path, biaslab_config** out);
BIASLAB_API biaslab_status biaslab_config_parse(const char* json_text, biaslab_config** out);
BIASLAB_API biaslab_status biaslab_config_default(biaslab_config** out);
/* Replaces the seed list with a single seed. */
BIASLAB_API biaslab_status biaslab_config_set_seed(biaslab_config* config, uint64_t seed);
BIASLAB_API biaslab_status biaslab_config_set_output_dir(biaslab_config* config, const char* dir);
BIASLAB_API biaslab_status biaslab_config_output_dir(const biaslab_config* config, char** out);
BIASLAB_API biaslab_status biaslab_config_to_json(const biaslab_config* config, char** out);
BIASLAB_API void biaslab_config_free(biaslab_config* config);

/* Commands. With verbose set, one progress line per run goes to stderr. */
BIASLAB_API biaslab_status biaslab_run_train(const biaslab_config* config, int verbose);
BIASLAB_API biaslab_status biaslab_run_bias(const biaslab_config* config, int verbose);
BIASLAB_API biaslab_status biaslab_run_closed_form(const biaslab_config* config, int verbose);
/* Summarizes completed runs found under the given directories. Either
 * output pointer may be NULL. */
BIASLAB_API biaslab_status biaslab_run_compare(const char* const* dirs, size_t n_dirs, char** csv_out,
                                               char** table_out);

/* Pendulum with observation (cos, sin, angular velocity) and one torque. */
BIASLAB_API biaslab_status biaslab_env_create(double reward_noise, int max_episode_steps, uint64_t seed,
                                              biaslab_env** out);
BIASLAB_API biaslab_status biaslab_env_reset(biaslab_env* env, double observation[3]);
BIASLAB_API biaslab_status biaslab_env_step(biaslab_env* env, double action, double observation[3], double* reward,
                                            int* terminal);
BIASLAB_API void biaslab_env_free(biaslab_env* env);

#ifdef __cplusplus
}
#endif

#endif
