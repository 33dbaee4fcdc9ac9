#ifndef COMPCAP_H
#define COMPCAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CompcapFormat {
  COMPCAP_FORMAT_MARKDOWN = 0,
  COMPCAP_FORMAT_CSV = 1,
} CompcapFormat;

typedef enum CompcapStatus {
  COMPCAP_STATUS_OK = 0,
  COMPCAP_STATUS_NULL_ARGUMENT = 1,
  COMPCAP_STATUS_INVALID_UTF8 = 2,
  COMPCAP_STATUS_PARSE = 3,
  COMPCAP_STATUS_INVALID_MACHINE = 4,
  COMPCAP_STATUS_UNSUPPORTED_CLASS = 5,
  COMPCAP_STATUS_DEGENERATE_SPECTRUM = 6,
  COMPCAP_STATUS_PERIOD_MISALIGNED = 7,
  COMPCAP_STATUS_INVALID_ARGUMENT = 8,
  COMPCAP_STATUS_PANIC = 255,
} CompcapStatus;

/**
 * Opaque machine description.
 */
typedef struct CompcapMachine CompcapMachine;

/**
 * Opaque latency spectrum.
 */
typedef struct CompcapSpectrum CompcapSpectrum;

/**
 * Solved capacity. The throughput fields are meaningful only when
 * `has_throughput` is set, i.e. a clock was known.
 */
typedef struct CompcapCapacity {
  double z0;
  double capacity_per_cycle;
  uint32_t pipeline_width;
  uint32_t cores;
  bool has_throughput;
  double per_core_bps;
  double system_bps;
  double residual;
} CompcapCapacity;

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *compcap_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void compcap_string_free(char *s);

/**
 * Parse a machine file.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CompcapStatus compcap_machine_parse(const char *text, struct CompcapMachine **out);

/**
 * # Safety
 * `machine` must be NULL or a handle from this library not yet freed.
 */
void compcap_machine_free(struct CompcapMachine *machine);

/**
 * Render a machine back to the machine-file format.
 *
 * # Safety
 * `machine` must be a live handle; `out` must be writable.
 */
enum CompcapStatus compcap_machine_render(const struct CompcapMachine *machine, char **out);

/**
 * Apply one modification (candidate-file syntax, e.g. `scale_int_regs 2`)
 * and return a new machine. The input handle is unchanged.
 *
 * # Safety
 * `machine` must be a live handle, `modification` NUL-terminated, `out` writable.
 */
enum CompcapStatus compcap_machine_apply(const struct CompcapMachine *machine,
                                         const char *modification,
                                         struct CompcapMachine **out);

/**
 * # Safety
 * `machine` must be a live handle; `out` must be writable.
 */
enum CompcapStatus compcap_machine_spectrum(const struct CompcapMachine *machine,
                                            struct CompcapSpectrum **out);

/**
 * # Safety
 * `machine` must be a live handle; `out` must be writable.
 */
enum CompcapStatus compcap_machine_capacity(const struct CompcapMachine *machine,
                                            struct CompcapCapacity *out);

/**
 * An empty spectrum, to be filled with `compcap_spectrum_add*`.
 */
struct CompcapSpectrum *compcap_spectrum_new(void);

/**
 * Parse a spectrum file (`LATENCY COUNT` per line).
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
enum CompcapStatus compcap_spectrum_parse(const char *text, struct CompcapSpectrum **out);

/**
 * # Safety
 * `spectrum` must be NULL or a handle from this library not yet freed.
 */
void compcap_spectrum_free(struct CompcapSpectrum *spectrum);

/**
 * Add `count` instructions of the given latency (merging with existing terms).
 *
 * # Safety
 * `spectrum` must be a live handle.
 */
enum CompcapStatus compcap_spectrum_add(struct CompcapSpectrum *spectrum,
                                        uint32_t latency,
                                        uint64_t count);

/**
 * Like `compcap_spectrum_add` with the count as a decimal string of any size.
 *
 * # Safety
 * `spectrum` must be a live handle; `count` NUL-terminated.
 */
enum CompcapStatus compcap_spectrum_add_decimal(struct CompcapSpectrum *spectrum,
                                                uint32_t latency,
                                                const char *count);

/**
 * Number of distinct latencies, 0 for NULL.
 *
 * # Safety
 * `spectrum` must be NULL or a live handle.
 */
size_t compcap_spectrum_len(const struct CompcapSpectrum *spectrum);

/**
 * `log2` of the largest root of the characteristic equation.
 *
 * # Safety
 * `spectrum` must be a live handle; `out` writable.
 */
enum CompcapStatus compcap_solve_root(const struct CompcapSpectrum *spectrum,
                                      double rel_tol,
                                      double *out);

/**
 * Capacity of a spectrum at the given width and core count. A clock
 * `<= 0` means unknown and leaves the throughput fields unset.
 *
 * # Safety
 * `spectrum` must be a live handle; `out` writable.
 */
enum CompcapStatus compcap_capacity_from_spectrum(const struct CompcapSpectrum *spectrum,
                                                  uint32_t pipeline_width,
                                                  uint32_t cores,
                                                  double clock_hz,
                                                  struct CompcapCapacity *out);

/**
 * Growth rate of exact sequence counts at duration `t`.
 *
 * # Safety
 * `spectrum` must be a live handle; `out` writable.
 */
enum CompcapStatus compcap_oracle_rate(const struct CompcapSpectrum *spectrum,
                                       uint64_t t,
                                       double *out);

/**
 * Run sweeps and render every table. `config` may be NULL for the default
 * protocol.
 *
 * # Safety
 * `machine` must be a live handle; `config` NULL or NUL-terminated; `out` writable.
 */
enum CompcapStatus compcap_sweep(const struct CompcapMachine *machine,
                                 const char *config,
                                 enum CompcapFormat format,
                                 char **out);

/**
 * Rank candidates (candidate-file text) and render the ranking.
 *
 * # Safety
 * `machine` must be a live handle; `candidates` NUL-terminated; `out` writable.
 */
enum CompcapStatus compcap_evolve(const struct CompcapMachine *machine,
                                  const char *candidates,
                                  enum CompcapFormat format,
                                  char **out);

/**
 * Normalize a benchmark CSV (`name,passmark,capacity_mbps`) to its first
 * row. With `plot` set, emits x/y plot data instead of the table.
 *
 * # Safety
 * `csv_text` must be NUL-terminated; `out` writable.
 */
enum CompcapStatus compcap_compare(const char *csv_text,
                                   bool plot,
                                   enum CompcapFormat format,
                                   char **out);

#endif  /* COMPCAP_H */
