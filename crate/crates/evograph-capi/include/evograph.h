/* C interface for the evograph replicator library. */

#ifndef EVOGRAPH_H
#define EVOGRAPH_H

/* Generated by the evograph-capi build script; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Update rule selector. Functions take these as `uint32_t` so that an
// out-of-range value can be rejected instead of being undefined behavior.
typedef enum EgRule {
  // Imitation through pairwise payoff comparison on the graph.
  EG_RULE_PAIRWISE_COMPARISON = 0,
  // Death-birth updating on the graph.
  EG_RULE_DEATH_BIRTH = 1,
  // Well-mixed baseline without graph structure.
  EG_RULE_WELL_MIXED = 2,
} EgRule;

// Outcome of a fallible call.
typedef enum EgStatus {
  // The call succeeded and all out-parameters were written.
  EG_STATUS_OK = 0,
  // A required pointer argument was null.
  EG_STATUS_NULL_POINTER = 1,
  // An argument failed validation; see `eg_last_error_message`.
  EG_STATUS_INVALID_ARGUMENT = 2,
  // A numerical procedure failed partway through.
  EG_STATUS_NUMERICAL = 3,
  // A filesystem operation failed.
  EG_STATUS_IO = 4,
  // A caller-supplied buffer is too small for the value.
  EG_STATUS_BUFFER_TOO_SMALL = 5,
  // An index lies outside the valid range for the handle.
  EG_STATUS_INDEX_OUT_OF_RANGE = 6,
  // A string argument is not valid UTF-8.
  EG_STATUS_INVALID_UTF8 = 7,
  // The library panicked; treat involved handles as poisoned.
  EG_STATUS_PANIC = 8,
} EgStatus;

// Why an integration run stopped.
typedef enum EgTerminal {
  // The field magnitude stayed below the convergence threshold away from
  // any vertex.
  EG_TERMINAL_CONVERGED = 0,
  // Time ran out before the field slowed down.
  EG_TERMINAL_MAX_TIME = 1,
  // The field slowed down with one strategy at fixation.
  EG_TERMINAL_BOUNDARY_ABSORBED = 2,
} EgTerminal;

// Opaque payoff model handle.
typedef struct EgModel EgModel;

// Opaque replicator vector-field handle.
typedef struct EgSystem EgSystem;

// Opaque integration result handle.
typedef struct EgTrajectory EgTrajectory;

// Closed-form critical fines at one (r, cost, alpha, k) point.
typedef struct EgThresholds {
  // Fine below which defection is the only stable state, well-mixed.
  double beta0_wm;
  // Fine below which defection is the only stable state, on the graph.
  double beta0;
  // Fine at which the structured and well-mixed interior equilibria
  // coincide.
  double beta_eq;
  // Fine above which the defector vertex loses stability on the graph.
  double beta_star;
} EgThresholds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *eg_version(void);

// Message for the most recent failure on the calling thread.
//
// The pointer stays valid until the next failing call on the same thread.
// Before any failure it is the empty string, never null.
const char *eg_last_error_message(void);

// Creates a public goods model: strategies C and D, pot factor `r`,
// contribution `cost`, `k` co-players per game.
//
// # Safety
// `out` must be a valid location to store a pointer.
enum EgStatus eg_model_pgg(uint32_t k, double r, double cost, struct EgModel **out);

// Creates a peer punishment model: strategies C, D, E where punishers pay
// `alpha` per defecting co-player to fine each defector `beta`.
//
// # Safety
// `out` must be a valid location to store a pointer.
enum EgStatus eg_model_peer_punishment(uint32_t k,
                                       double r,
                                       double cost,
                                       double alpha,
                                       double beta,
                                       struct EgModel **out);

// Creates a pool punishment model: strategies C, D, O where punishers pay
// a flat `alpha` and defectors lose `beta` whenever a punisher is present.
//
// # Safety
// `out` must be a valid location to store a pointer.
enum EgStatus eg_model_pool_punishment(uint32_t k,
                                       double r,
                                       double cost,
                                       double alpha,
                                       double beta,
                                       struct EgModel **out);

// Loads a payoff model from a JSON document on disk.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be a valid location
// to store a pointer.
enum EgStatus eg_model_from_file(const char *path, struct EgModel **out);

// Releases a model handle. Null is ignored.
//
// # Safety
// `model` must be null or a pointer from an `eg_model_*` constructor that
// has not been freed yet.
void eg_model_free(struct EgModel *model);

// Number of strategies, or 0 when `model` is null.
//
// # Safety
// `model` must be null or a live model handle.
uint32_t eg_model_strategy_count(const struct EgModel *model);

// Number of co-players per game, or 0 when `model` is null.
//
// # Safety
// `model` must be null or a live model handle.
uint32_t eg_model_degree(const struct EgModel *model);

// Copies the NUL-terminated name of strategy `index` into `buffer`.
//
// # Safety
// `model` must be a live model handle and `buffer` must point to at least
// `capacity` writable bytes.
enum EgStatus eg_model_strategy_name(const struct EgModel *model,
                                     uint32_t index,
                                     char *buffer,
                                     size_t capacity);

// Payoff of a focal player using strategy `focal` whose `counts[j]`
// co-players use strategy j. `counts` has one entry per strategy and must
// sum to the model degree.
//
// # Safety
// `model` must be a live model handle, `counts` must point to
// `counts_len` readable entries, and `out` must be writable.
enum EgStatus eg_model_payoff(const struct EgModel *model,
                              uint32_t focal,
                              const uint32_t *counts,
                              size_t counts_len,
                              double *out);

// Creates a replicator vector field over `model` with selection strength
// `delta`. `rule` is one of the `EgRule` constants. The model handle stays
// owned by the caller and may be freed independently.
//
// # Safety
// `model` must be a live model handle; `out` must be a valid location to
// store a pointer.
enum EgStatus eg_system_new(const struct EgModel *model,
                            uint32_t rule,
                            double delta,
                            struct EgSystem **out);

// Releases a system handle. Null is ignored.
//
// # Safety
// `system` must be null or a pointer from `eg_system_new` that has not
// been freed yet.
void eg_system_free(struct EgSystem *system);

// Number of strategies of the underlying model, or 0 when `system` is
// null.
//
// # Safety
// `system` must be null or a live system handle.
uint32_t eg_system_strategy_count(const struct EgSystem *system);

// Evaluates dx/dt at the frequency vector `x` and writes it to `out`.
// Both slices have `len` entries, one per strategy; `x` must lie on the
// probability simplex.
//
// # Safety
// `system` must be a live system handle, `x` must point to `len` readable
// doubles, and `out` to `len` writable doubles.
enum EgStatus eg_system_rhs(const struct EgSystem *system,
                            const double *x,
                            size_t len,
                            double *out);

// Integrates the system from `x0` until `t_max`, recording every accepted
// step. `tol` is the relative local error target in (0, 1).
//
// # Safety
// `system` must be a live system handle, `x0` must point to `len`
// readable doubles, and `out` must be a valid location to store a pointer.
enum EgStatus eg_system_integrate(const struct EgSystem *system,
                                  const double *x0,
                                  size_t len,
                                  double t_max,
                                  double tol,
                                  struct EgTrajectory **out);

// Releases a trajectory handle. Null is ignored.
//
// # Safety
// `trajectory` must be null or a pointer from `eg_system_integrate` that
// has not been freed yet.
void eg_trajectory_free(struct EgTrajectory *trajectory);

// Number of recorded steps, or 0 when `trajectory` is null.
//
// # Safety
// `trajectory` must be null or a live trajectory handle.
size_t eg_trajectory_len(const struct EgTrajectory *trajectory);

// Number of strategies per recorded state, or 0 when `trajectory` is
// null.
//
// # Safety
// `trajectory` must be null or a live trajectory handle.
uint32_t eg_trajectory_dimension(const struct EgTrajectory *trajectory);

// Writes why the integration stopped to `out`.
//
// # Safety
// `trajectory` must be a live trajectory handle and `out` must be
// writable.
enum EgStatus eg_trajectory_terminal(const struct EgTrajectory *trajectory, enum EgTerminal *out);

// Copies recorded step `index`: its time into `time_out` and its state
// into the `state_capacity`-entry buffer `state_out`. The state needs one
// entry per strategy.
//
// # Safety
// `trajectory` must be a live trajectory handle, `time_out` must be
// writable, and `state_out` must point to `state_capacity` writable
// doubles.
enum EgStatus eg_trajectory_point(const struct EgTrajectory *trajectory,
                                  size_t index,
                                  double *time_out,
                                  double *state_out,
                                  size_t state_capacity);

// Critical fines for peer punishment at degree `k`, written to `out`.
// Requires the social-dilemma regime r < k + 1.
//
// # Safety
// `out` must be writable.
enum EgStatus eg_peer_thresholds(uint32_t k,
                                 double r,
                                 double cost,
                                 double alpha,
                                 struct EgThresholds *out);

// Critical fines for pool punishment at degree `k`, written to `out`.
// Requires the social-dilemma regime r < k + 1.
//
// # Safety
// `out` must be writable.
enum EgStatus eg_pool_thresholds(uint32_t k,
                                 double r,
                                 double cost,
                                 double alpha,
                                 struct EgThresholds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOGRAPH_H */
