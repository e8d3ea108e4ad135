#ifndef NETADVECT_H
#define NETADVECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NetadvectStatus {
  NETADVECT_STATUS_OK = 0,
  // A required pointer argument was null.
  NETADVECT_STATUS_NULL_POINTER = 1,
  // Malformed text input: JSON, UTF-8 or a scheme name.
  NETADVECT_STATUS_PARSE = 2,
  // Well-formed input that describes an invalid problem.
  NETADVECT_STATUS_VALIDATION = 3,
  NETADVECT_STATUS_SOLVE = 4,
  // Output buffer too small or index out of range.
  NETADVECT_STATUS_BUFFER = 5,
  NETADVECT_STATUS_PANIC = 6,
} NetadvectStatus;

// Parsed and validated network.
typedef struct NetadvectNetwork NetadvectNetwork;

// Result of a network solve.
typedef struct NetadvectSolution NetadvectSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *netadvect_last_error(void);

// Parses a network description (JSON, NUL-terminated).
//
// # Safety
// `json` must be a valid C string and `out` a valid pointer.
enum NetadvectStatus netadvect_network_from_json(const char *json, struct NetadvectNetwork **out);

// # Safety
// `network` must come from `netadvect_network_from_json` and not be used
// afterwards. Null is ignored.
void netadvect_network_free(struct NetadvectNetwork *network);

// Number of edges, or 0 for a null handle.
//
// # Safety
// `network` must be null or a live handle.
size_t netadvect_network_edge_count(const struct NetadvectNetwork *network);

// Index of the edge with the given id.
//
// # Safety
// `network` must be a live handle, `id` a valid C string, `index` valid.
enum NetadvectStatus netadvect_network_edge_index(const struct NetadvectNetwork *network,
                                                  const char *id,
                                                  size_t *index);

// Solves every edge with the named scheme (`first`, `second`, `third`,
// `weno`, `hr`, `direct-hr` or `w=<value>`).
//
// # Safety
// `network` must be a live handle, `scheme` a valid C string and `out` a
// valid pointer.
enum NetadvectStatus netadvect_network_solve(const struct NetadvectNetwork *network,
                                             const char *scheme,
                                             struct NetadvectSolution **out);

// # Safety
// `solution` must come from `netadvect_network_solve` and not be used
// afterwards. Null is ignored.
void netadvect_solution_free(struct NetadvectSolution *solution);

// Cell count `I` and step count `N` of one edge; its table holds
// `(I + 1) * (N + 1)` values.
//
// # Safety
// `solution` must be a live handle; `cells` and `steps` valid pointers.
enum NetadvectStatus netadvect_solution_edge_dims(const struct NetadvectSolution *solution,
                                                  size_t edge,
                                                  size_t *cells,
                                                  size_t *steps);

// Copies the values of one edge into `buffer`, column-major: node `(i, n)`
// goes to `buffer[i * (N + 1) + n]`.
//
// # Safety
// `buffer` must hold `len` doubles.
enum NetadvectStatus netadvect_solution_edge_values(const struct NetadvectSolution *solution,
                                                    size_t edge,
                                                    double *buffer,
                                                    size_t len);

// Number of local bound violations over all edges.
//
// # Safety
// `solution` must be a live handle and `count` a valid pointer.
enum NetadvectStatus netadvect_solution_dmp_violations(const struct NetadvectSolution *solution,
                                                       size_t *count);

// Global mass balance: residual and the throughput that scales it.
//
// # Safety
// `solution` must be a live handle; the outputs valid pointers.
enum NetadvectStatus netadvect_solution_balance(const struct NetadvectSolution *solution,
                                                double *residual,
                                                double *throughput);

// Solves one uniform edge of length `length` with `cells` cells up to time
// `horizon` with `steps` steps, constant `velocity` and capacity `kappa`.
// `boundary` holds `steps + 1` inflow values, `initial` holds `cells + 1`
// values or is null for zero data. The result is written column-major into
// `out`, which must hold `(cells + 1) * (steps + 1)` doubles.
//
// # Safety
// All non-null pointers must reference buffers of the stated sizes.
enum NetadvectStatus netadvect_edge_solve(double length,
                                          size_t cells,
                                          double horizon,
                                          size_t steps,
                                          double kappa,
                                          double velocity,
                                          const double *boundary,
                                          const double *initial,
                                          const char *scheme,
                                          double *out,
                                          size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETADVECT_H */
