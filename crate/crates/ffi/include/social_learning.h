#ifndef SOCIAL_LEARNING_H
#define SOCIAL_LEARNING_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Verdict codes used by [`SlStatePrediction`] and trial outcomes.
 */
#define SL_WRONG 0

#define SL_TRUE 1

/**
 * Indeterminate prediction or undecided simulation.
 */
#define SL_UNDECIDED 2

/**
 * Result codes. The numeric values of the config, numeric and I/O classes
 * match the command-line exit codes.
 */
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  /**
   * Null pointer, bad length or invalid UTF-8.
   */
  SL_STATUS_INVALID_ARGUMENT = 1,
  SL_STATUS_CONFIG = 2,
  SL_STATUS_NUMERIC = 3,
  SL_STATUS_IO = 4,
  /**
   * Output buffer shorter than required.
   */
  SL_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  SL_STATUS_INTERNAL = 6,
} SlStatus;

/**
 * Opaque validated experiment.
 */
typedef struct SlExperiment SlExperiment;

/**
 * Opaque Monte Carlo result.
 */
typedef struct SlSimulation SlSimulation;

typedef struct SlStatePrediction {
  double lhs;
  double rhs;
  double margin;
  int verdict;
} SlStatePrediction;

/**
 * Index 0 is the prediction when the first state is true.
 */
typedef struct SlPrediction {
  struct SlStatePrediction states[2];
} SlPrediction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to fit) and returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sl_last_error(char *buf, size_t len);

/**
 * Parses and validates a JSON experiment configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SlStatus sl_experiment_from_json(const char *json, struct SlExperiment **out);

/**
 * # Safety
 * `exp` must be null or a handle from [`sl_experiment_from_json`] not yet freed.
 */
void sl_experiment_free(struct SlExperiment *exp);

/**
 * # Safety
 * `exp` must be a live handle.
 */
size_t sl_experiment_n_agents(const struct SlExperiment *exp);

/**
 * Writes the network centrality vector into `out[0..n_agents]`.
 *
 * # Safety
 * `exp` must be a live handle; `out` must hold `len` doubles.
 */
enum SlStatus sl_experiment_centrality(const struct SlExperiment *exp, double *out, size_t len);

/**
 * Limit prediction for the configured attack (random attacks use the draw
 * of the base seed).
 *
 * # Safety
 * `exp` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_experiment_analyze(const struct SlExperiment *exp, struct SlPrediction *out);

/**
 * Runs the configured Monte Carlo batch. `trials == 0` uses the config value.
 *
 * # Safety
 * `exp` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_experiment_simulate(const struct SlExperiment *exp,
                                     size_t trials,
                                     struct SlSimulation **out);

/**
 * # Safety
 * `sim` must be null or a handle from [`sl_experiment_simulate`] not yet freed.
 */
void sl_simulation_free(struct SlSimulation *sim);

/**
 * Number of recorded rounds, including the initial one.
 *
 * # Safety
 * `sim` must be a live handle.
 */
size_t sl_simulation_rounds(const struct SlSimulation *sim);

/**
 * # Safety
 * `sim` must be a live handle.
 */
size_t sl_simulation_trials(const struct SlSimulation *sim);

/**
 * Mean over trials of the average belief on the true state, per round.
 *
 * # Safety
 * `sim` must be a live handle; `out` must hold `len` doubles.
 */
enum SlStatus sl_simulation_mean_trajectory(const struct SlSimulation *sim,
                                            double *out,
                                            size_t len);

/**
 * Writes the empirical outcome code of trial `index`.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_simulation_trial_outcome(const struct SlSimulation *sim, size_t index, int *out);

/**
 * Fraction of decided trials agreeing with the prediction; NaN when none
 * was decided.
 *
 * # Safety
 * `sim` must be a live handle.
 */
double sl_simulation_agreement_rate(const struct SlSimulation *sim);

/**
 * Closed-form unknown-divergence distortion for one agent model.
 *
 * # Safety
 * `l1`, `l2`, `out_l1`, `out_l2` must each point to `n` doubles.
 */
enum SlStatus sl_asud_attack(const double *l1,
                             const double *l2,
                             size_t n,
                             double pi1,
                             double pi2,
                             double epsilon,
                             double *out_l1,
                             double *out_l2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOCIAL_LEARNING_H */
