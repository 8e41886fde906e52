/* Copyright 2026 The Tracelight Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef TRACELIGHT_H
#define TRACELIGHT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_INVALID_ARGUMENT = 1,
  TL_STATUS_EMPTY_REPORT = 2,
  TL_STATUS_UNRECOGNIZED_FORMAT = 3,
  TL_STATUS_PARSE_ERROR = 4,
  TL_STATUS_INVALID_K = 5,
  TL_STATUS_UNKNOWN_GROUP = 6,
  TL_STATUS_INDEX_OUT_OF_RANGE = 7,
  TL_STATUS_LOCKED = 8,
  TL_STATUS_READ_ONLY = 9,
  TL_STATUS_IO_FAILURE = 10,
  TL_STATUS_CORRUPT = 11,
  TL_STATUS_PANIC = 99,
} TlStatus;

typedef enum TlFormat {
  TL_FORMAT_AUTO = 0,
  TL_FORMAT_JVM = 1,
  TL_FORMAT_PYTHON = 2,
} TlFormat;

/**
 * Opaque handle to an opened data directory.
 */
typedef struct TlEngine TlEngine;

typedef struct TlStats {
  uint64_t n_groups;
  uint64_t n_reports;
  uint64_t distinct_frames;
} TlStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens `data_dir` as its single writer, recovering its state.
 *
 * `rules_json` is NULL or a JSON array of `{"prefix", "label"}` objects.
 *
 * # Safety
 * `data_dir` must be a valid NUL-terminated string, `rules_json` NULL or a
 * valid NUL-terminated string, and `out` a valid pointer to writable storage.
 */
enum TlStatus tl_engine_open(const char *data_dir,
                             uint32_t k,
                             const char *rules_json,
                             struct TlEngine **out);

/**
 * Opens `data_dir` for scoring and inspection only; takes no lock and
 * writes nothing.
 *
 * # Safety
 * Same as [`tl_engine_open`].
 */
enum TlStatus tl_engine_open_readonly(const char *data_dir,
                                      uint32_t k,
                                      const char *rules_json,
                                      struct TlEngine **out);

/**
 * # Safety
 * `engine` must be NULL or a handle returned by an open function that has
 * not been freed yet.
 */
void tl_engine_free(struct TlEngine *engine);

/**
 * Ingests one report and writes the ingest result as JSON to `out_json`.
 *
 * # Safety
 * `engine` must be a live writer handle, `text` a valid NUL-terminated
 * string, `product` NULL or a valid NUL-terminated string, `out_json` a valid
 * pointer to writable storage.
 */
enum TlStatus tl_ingest(struct TlEngine *engine,
                        const char *text,
                        enum TlFormat format,
                        const char *product,
                        char **out_json);

/**
 * Scores a trace without recording it; JSON `{frames, suggestions}`.
 *
 * # Safety
 * `engine` must be a live handle, `text` a valid NUL-terminated string,
 * `out_json` a valid pointer to writable storage.
 */
enum TlStatus tl_score(struct TlEngine *engine,
                       const char *text,
                       enum TlFormat format,
                       char **out_json);

/**
 * Group detail JSON `{group, frames, suggestions, selection}`.
 *
 * # Safety
 * `engine` must be a live handle, `group_id` a valid NUL-terminated string,
 * `out_json` a valid pointer to writable storage.
 */
enum TlStatus tl_group(struct TlEngine *engine, const char *group_id, char **out_json);

/**
 * Replaces the group's manual selection. `indices` may be NULL when `len`
 * is 0, which clears the selection.
 *
 * # Safety
 * `engine` must be a live writer handle, `group_id` a valid NUL-terminated
 * string, `indices` valid for `len` reads, `author` NULL or a valid
 * NUL-terminated string.
 */
enum TlStatus tl_save_selection(struct TlEngine *engine,
                                const char *group_id,
                                const uint32_t *indices,
                                size_t len,
                                const char *author);

/**
 * # Safety
 * `engine` must be a live handle and `out` a valid pointer.
 */
enum TlStatus tl_stats(struct TlEngine *engine, struct TlStats *out);

/**
 * Writes `snapshot.json` for a writer handle.
 *
 * # Safety
 * `engine` must be a live writer handle.
 */
enum TlStatus tl_snapshot(struct TlEngine *engine);

/**
 * Smoothed IDF `ln((1 + n_groups) / (1 + df)) + 1`.
 */
double tl_idf(uint64_t n_groups, uint64_t df);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread; do not free.
 */
const char *tl_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void tl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACELIGHT_H */
