/* C interface to the bosewell two-mode Bose-Hubbard simulator.
 *
 * Every function returns a bw_status. On failure the message for the calling
 * thread is available from bw_last_error() until the next call on that
 * thread. Handles are opaque; each *_create has a matching *_destroy, and
 * destroying NULL is a no-op.
 *
 * Energies are in units of U (U = 1); times in units of hbar/U.
 */
#ifndef BOSEWELL_H
#define BOSEWELL_H

#include <stddef.h>

#if defined(BOSEWELL_BUILDING)
#define BW_API __attribute__((visibility("default")))
#else
#define BW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bw_status {
  BW_OK = 0,
  BW_ERR_INVALID_ARGUMENT = 1, /* malformed parameters or configuration */
  BW_ERR_DOMAIN = 2,           /* value outside the domain of a formula */
  BW_ERR_NO_CONVERGENCE = 3,   /* eigensolver iteration cap reached */
  BW_ERR_NO_SOLUTION = 4,      /* no asymmetry reproduces the requested z0 */
  BW_ERR_IO = 5,               /* file system failure */
  BW_ERR_INTERNAL = 6          /* internal consistency check failed */
} bw_status;

typedef struct bw_config bw_config;
typedef struct bw_spectrum bw_spectrum;

BW_API const char* bw_version(void);
BW_API const char* bw_last_error(void);

/* ---- run configuration (the command-line front end drives this) ---- */

/* command: spectrum | occupation | evolve | sweep | doublets | report */
BW_API bw_status bw_config_create(const char* command, bw_config** out);
BW_API void bw_config_destroy(bw_config* config);

BW_API bw_status bw_config_set_particles(bw_config* config, int n_particles);
BW_API bw_status bw_config_set_j_over_u(bw_config* config, double j_over_u);
BW_API bw_status bw_config_set_delta_over_u(bw_config* config, double delta_over_u);
BW_API bw_status bw_config_set_z0(bw_config* config, double z0);
BW_API bw_status bw_config_set_z0_grid(bw_config* config, double start, double stop,
                                       double step);
/* Parses "start:stop:step". */
BW_API bw_status bw_config_set_z0_grid_spec(bw_config* config, const char* spec);
BW_API bw_status bw_config_set_window_periods(bw_config* config, double periods);
BW_API bw_status bw_config_set_samples_per_period(bw_config* config, int samples);
/* "-" writes to standard output. */
BW_API bw_status bw_config_set_output(bw_config* config, const char* path);
/* "csv" or "json" */
BW_API bw_status bw_config_set_format(bw_config* config, const char* format);
BW_API bw_status bw_config_set_cache_dir(bw_config* config, const char* dir);
/* 0 selects the available hardware parallelism. */
BW_API bw_status bw_config_set_threads(bw_config* config, unsigned threads);
BW_API bw_status bw_config_set_doublet_threshold(bw_config* config, double threshold);
BW_API bw_status bw_config_set_zc_threshold(bw_config* config, double threshold);

/* Checks the configuration without running it. */
BW_API bw_status bw_config_validate(const bw_config* config);
/* Runs the configured command and writes its output files. */
BW_API bw_status bw_run(const bw_config* config);

/* ---- spectra ---- */

BW_API bw_status bw_spectrum_compute(int n_particles, double j, double u, double delta,
                                     bw_spectrum** out);
BW_API void bw_spectrum_destroy(bw_spectrum* spectrum);
BW_API size_t bw_spectrum_dim(const bw_spectrum* spectrum);
/* Copies all dim eigenvalues (ascending); capacity must be >= dim. */
BW_API bw_status bw_spectrum_values(const bw_spectrum* spectrum, double* out, size_t capacity);
/* Copies eigenvector m (dim entries, Fock index k = n1 ascending). */
BW_API bw_status bw_spectrum_vector(const bw_spectrum* spectrum, size_t m, double* out,
                                    size_t capacity);

/* ---- dynamics ---- */

/* z(t) at `count` times for the state prepared with imbalance z0 from the
 * symmetric model (n_particles, j_over_u, U = 1). */
BW_API bw_status bw_evolve_imbalance(int n_particles, double j_over_u, double z0,
                                     const double* times, size_t count, double* z_out);
/* Exact mean of z(t) over [0, window] divided by z0. */
BW_API bw_status bw_window_average_ratio(int n_particles, double j_over_u, double z0,
                                         double window, double* out);

/* ---- closed forms ---- */

BW_API bw_status bw_plasma_frequency(int n_particles, double j, double u, double* out);
/* log10 of 2N (J/U)^N / (N-1)! */
BW_API bw_status bw_doublet_splitting_log10(int n_particles, double j_over_u, double* out);
/* min(1, 2 sqrt(1+lambda)/lambda); *clipped set to 1 when the raw value exceeded 1. */
BW_API bw_status bw_semiclassical_zc(double lambda, double* out, int* clipped);

#ifdef __cplusplus
}
#endif

#endif /* BOSEWELL_H */
