#ifndef ISECT4D_H
#define ISECT4D_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Isect4dMode {
  ISECT4D_MODE_DETECT = 0,
  ISECT4D_MODE_COUNT = 1,
  ISECT4D_MODE_REPORT = 2,
} Isect4dMode;

typedef enum Isect4dSceneKind {
  ISECT4D_SCENE_KIND_SEGMENTS = 0,
  ISECT4D_SCENE_KIND_TRIANGLES = 1,
  ISECT4D_SCENE_KIND_TETRAHEDRA = 2,
  ISECT4D_SCENE_KIND_MOVING_TETRAHEDRA = 3,
  ISECT4D_SCENE_KIND_FLATS_AND_LINES = 4,
} Isect4dSceneKind;

typedef enum Isect4dSetup {
  /**
   * Segment queries against stored tetrahedra.
   */
  ISECT4D_SETUP_SEG_TETRA = 0,
  ISECT4D_SETUP_TRI_TRI = 1,
  /**
   * Tetrahedron queries against stored segments.
   */
  ISECT4D_SETUP_TETRA_SEG = 2,
  /**
   * Line queries against stored 2-flats.
   */
  ISECT4D_SETUP_LINE_FLAT = 3,
} Isect4dSetup;

typedef enum Isect4dStatus {
  ISECT4D_STATUS_OK = 0,
  ISECT4D_STATUS_NULL_POINTER = 1,
  ISECT4D_STATUS_INVALID_UTF8 = 2,
  ISECT4D_STATUS_SCHEMA = 3,
  ISECT4D_STATUS_INVALID_OBJECT = 4,
  ISECT4D_STATUS_DEGENERATE = 5,
  ISECT4D_STATUS_OUT_OF_RANGE = 6,
  ISECT4D_STATUS_SETUP_MISMATCH = 7,
  ISECT4D_STATUS_RETRIES_EXHAUSTED = 8,
  ISECT4D_STATUS_PANIC = 9,
} Isect4dStatus;

/**
 * Answer of a query batch, with traversal counters when produced by a structure.
 */
typedef struct Isect4dReport Isect4dReport;

/**
 * A validated scene file.
 */
typedef struct Isect4dScene Isect4dScene;

/**
 * A multilevel range structure over one scene.
 */
typedef struct Isect4dStructure Isect4dStructure;

typedef struct Isect4dBuildStats {
  uint64_t nodes;
  uint64_t stored_items;
  uint64_t max_leaf;
} Isect4dBuildStats;

typedef struct Isect4dKCounts {
  uint64_t k2;
  uint64_t k3;
  uint64_t k4;
} Isect4dKCounts;

typedef struct Isect4dQueryStats {
  uint64_t nodes_visited;
  uint64_t canonical_sets_touched;
  uint64_t leaf_items_scanned;
  uint64_t exact_predicate_calls;
} Isect4dQueryStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *isect4d_version(void);

/**
 * Message of the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *isect4d_last_error(void);

void isect4d_string_free(char *s);

/**
 * Parses and validates a scene document.
 */
enum Isect4dStatus isect4d_scene_from_json(const char *json, struct Isect4dScene **out);

/**
 * Generates a random scene with integer coordinates in `[-range, range]`.
 */
enum Isect4dStatus isect4d_scene_generate(enum Isect4dSceneKind kind,
                                          size_t n,
                                          int64_t range,
                                          uint64_t seed,
                                          struct Isect4dScene **out);

/**
 * Number of object records in the scene.
 */
enum Isect4dStatus isect4d_scene_len(const struct Isect4dScene *scene, size_t *out);

/**
 * Serialises the scene; free the result with `isect4d_string_free`.
 */
enum Isect4dStatus isect4d_scene_to_json(const struct Isect4dScene *scene, char **out);

void isect4d_scene_free(struct Isect4dScene *scene);

/**
 * Builds a range structure over the input objects of `setup` with storage `n^sigma`.
 *
 * For `LineFlat` the flats of a flats-and-lines scene are stored.
 */
enum Isect4dStatus isect4d_structure_build(const struct Isect4dScene *input,
                                           enum Isect4dSetup kind,
                                           double sigma,
                                           uint64_t seed,
                                           struct Isect4dStructure **out);

enum Isect4dStatus isect4d_structure_stats(const struct Isect4dStructure *structure,
                                           struct Isect4dBuildStats *out);

/**
 * Runs every object of `queries` against the structure as one batch.
 *
 * Hits are `(query index, input index)` pairs.
 */
enum Isect4dStatus isect4d_structure_query(const struct Isect4dStructure *structure,
                                           const struct Isect4dScene *queries,
                                           enum Isect4dMode m,
                                           struct Isect4dReport **out);

/**
 * Runs a single query object (record `index` of `queries`).
 */
enum Isect4dStatus isect4d_structure_query_one(const struct Isect4dStructure *structure,
                                               const struct Isect4dScene *queries,
                                               size_t index,
                                               enum Isect4dMode m,
                                               struct Isect4dReport **out);

void isect4d_structure_free(struct Isect4dStructure *structure);

/**
 * Exhaustive answer for the same batch as `isect4d_structure_query`.
 */
enum Isect4dStatus isect4d_oracle_query(const struct Isect4dScene *input,
                                        const struct Isect4dScene *queries,
                                        enum Isect4dSetup kind,
                                        enum Isect4dMode m,
                                        struct Isect4dReport **out);

/**
 * Collisions among the moving tetrahedra of a scene.
 *
 * A `threshold` of 0 selects the default.
 */
enum Isect4dStatus isect4d_ccd_detect(const struct Isect4dScene *scene,
                                      enum Isect4dMode m,
                                      size_t threshold,
                                      uint64_t seed,
                                      struct Isect4dReport **out);

/**
 * Arrangement entity counts of a tetrahedra scene.
 */
enum Isect4dStatus isect4d_arrangement_counts(const struct Isect4dScene *scene,
                                              struct Isect4dKCounts *out);

enum Isect4dStatus isect4d_report_detected(const struct Isect4dReport *report, bool *out);

enum Isect4dStatus isect4d_report_count(const struct Isect4dReport *report, uint64_t *out);

/**
 * Number of listed pairs (zero unless the query ran in report mode).
 */
enum Isect4dStatus isect4d_report_len(const struct Isect4dReport *report, size_t *out);

/**
 * Indices of pair `i`.
 */
enum Isect4dStatus isect4d_report_pair(const struct Isect4dReport *report,
                                       size_t i,
                                       size_t *a,
                                       size_t *b);

/**
 * Floating-point approximation of the witness of pair `i`.
 */
enum Isect4dStatus isect4d_report_witness(const struct Isect4dReport *report,
                                          size_t i,
                                          double *xyzw);

/**
 * Traversal counters; all zero for oracle and collision reports.
 */
enum Isect4dStatus isect4d_report_stats(const struct Isect4dReport *report,
                                        struct Isect4dQueryStats *out);

/**
 * Report as JSON with exact rational witnesses; free with `isect4d_string_free`.
 */
enum Isect4dStatus isect4d_report_to_json(const struct Isect4dReport *report, char **out);

void isect4d_report_free(struct Isect4dReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISECT4D_H */
