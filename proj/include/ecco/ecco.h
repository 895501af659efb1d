/* Entropy-aware cache-compression codec for fp16 tensor data.
 *
 * C API of the shared library. All objects are opaque handles created and
 * destroyed by the library; every fallible call returns an ecco_status and
 * the per-thread detail message is available via ecco_last_error().
 */
#ifndef ECCO_ECCO_H
#define ECCO_ECCO_H

#include <stddef.h>
#include <stdint.h>

#if defined(__cplusplus)
extern "C" {
#endif

typedef enum ecco_status {
    ECCO_OK = 0,
    ECCO_E_INVALID_ARGUMENT = 1,
    ECCO_E_IO = 2,
    ECCO_E_FORMAT = 3,
    ECCO_E_OVERFLOW = 4,
    ECCO_E_INTERNAL = 5,
} ecco_status;

typedef enum ecco_mode {
    ECCO_MODE_WEIGHT = 0,
    ECCO_MODE_KV = 1,
} ecco_mode;

typedef enum ecco_pattern_coding {
    ECCO_PATTERN_CODING_FIXED = 0,
    ECCO_PATTERN_CODING_HUFFMAN = 1,
} ecco_pattern_coding;

typedef enum ecco_ratio {
    ECCO_RATIO_4X = 0,
    ECCO_RATIO_2X = 1,
} ecco_ratio;

typedef enum ecco_decoder {
    ECCO_DECODER_REFERENCE = 0,
    ECCO_DECODER_PARALLEL = 1,
} ecco_decoder;

typedef enum ecco_distribution {
    ECCO_DIST_GAUSSIAN = 0,
    ECCO_DIST_LAPLACIAN = 1,
    ECCO_DIST_UNIFORM = 2,
} ecco_distribution;

/* Opaque handles. */
typedef struct ecco_tensor ecco_tensor;
typedef struct ecco_meta ecco_meta;
typedef struct ecco_blob ecco_blob;
typedef struct ecco_log ecco_log;

const char* ecco_version(void);

/* Message describing the most recent failure on this thread; valid until the
 * next failing call. */
const char* ecco_last_error(void);

/* fp16 helpers for callers handling raw bit patterns. Encoding rounds to
 * nearest, ties to even. */
double ecco_fp16_to_double(uint16_t bits);
uint16_t ecco_fp16_from_double(double v);

/* ---- tensors (2-D, fp16 bit patterns, row major) ---- */

ecco_status ecco_tensor_create(uint64_t rows, uint64_t cols,
                               const uint16_t* fp16_bits, ecco_tensor** out);
ecco_status ecco_tensor_generate(uint64_t rows, uint64_t cols, ecco_distribution dist,
                                 double scale, uint64_t seed, ecco_tensor** out);
ecco_status ecco_tensor_load(const char* path, ecco_tensor** out);
ecco_status ecco_tensor_save(const ecco_tensor* t, const char* path);
uint64_t ecco_tensor_rows(const ecco_tensor* t);
uint64_t ecco_tensor_cols(const ecco_tensor* t);
const uint16_t* ecco_tensor_data(const ecco_tensor* t);
void ecco_tensor_free(ecco_tensor* t);

/* Element-wise mean squared error between equal-shape tensors. */
ecco_status ecco_tensor_mse(const ecco_tensor* a, const ecco_tensor* b, double* out);

/* ---- calibration ---- */

typedef struct ecco_calib_params {
    uint32_t patterns;       /* shared k-means patterns; 0 = mode default (weight 64, kv 16) */
    uint32_t codebooks;      /* Huffman codebooks per pattern; 0 = default 4 */
    uint64_t seed;
    ecco_mode mode;
    ecco_pattern_coding pattern_coding;
    const float* column_weights; /* optional importance weights, length = cols */
} ecco_calib_params;

ecco_status ecco_calibrate(const ecco_tensor* t, const ecco_calib_params* params,
                           ecco_meta** out);
ecco_status ecco_meta_load(const char* path, ecco_meta** out);
ecco_status ecco_meta_save(const ecco_meta* m, const char* path);
uint32_t ecco_meta_patterns(const ecco_meta* m);
uint32_t ecco_meta_codebooks(const ecco_meta* m);
ecco_mode ecco_meta_mode(const ecco_meta* m);
void ecco_meta_free(ecco_meta* m);

/* ---- compression ---- */

/* 4x needs metadata; 2x ignores it. out_log may be NULL. */
ecco_status ecco_compress(const ecco_tensor* t, const ecco_meta* m, ecco_ratio ratio,
                          ecco_blob** out, ecco_log** out_log);

/* meta may be NULL for 2x blobs. trace_path, when non-NULL, receives
 * JSON-lines of the parallel decoder's per-stage results and forces the
 * parallel decoder. */
ecco_status ecco_decompress(const ecco_blob* b, const ecco_meta* m,
                            ecco_decoder decoder, const char* trace_path,
                            ecco_tensor** out);

ecco_status ecco_blob_load(const char* path, ecco_blob** out);
ecco_status ecco_blob_save(const ecco_blob* b, const char* path);
ecco_ratio ecco_blob_ratio(const ecco_blob* b);
uint64_t ecco_blob_groups(const ecco_blob* b);
uint64_t ecco_blob_bytes(const ecco_blob* b);
void ecco_blob_free(ecco_blob* b);

/* ---- encode log ---- */

/* Adds per-group reconstruction MSE to the log using the given decoder. */
ecco_status ecco_log_add_mse(ecco_log* log, const ecco_tensor* t, const ecco_meta* m,
                             ecco_decoder decoder);
ecco_status ecco_log_save(const ecco_log* log, const char* path);
uint64_t ecco_log_groups(const ecco_log* log);
ecco_status ecco_log_ratios(const ecco_log* log, double* clip_ratio, double* pad_ratio);
void ecco_log_free(ecco_log* log);

/* ---- reporting ---- */

typedef struct ecco_report_stats {
    double mse;
    int has_log; /* entropy/eta/clip/pad fields are valid only when nonzero */
    double entropy_bits;
    double bit_efficiency;
    double clip_ratio;
    double pad_ratio;
} ecco_report_stats;

/* log_path, csv_path and json_path may be NULL. */
ecco_status ecco_report_files(const char* orig_path, const char* recon_path,
                              const char* log_path, const char* csv_path,
                              const char* json_path, ecco_report_stats* out);

/* ---- design space exploration ---- */

/* Calibrates once per S value (per-group pattern fitting is shared across the
 * sweep) and fills out_mse[i * h_count + j] with the mean reconstruction MSE
 * for (s_values[i], h_values[j]). */
ecco_status ecco_dse(const ecco_tensor* t, const uint32_t* s_values, size_t s_count,
                     const uint32_t* h_values, size_t h_count, uint64_t seed,
                     ecco_mode mode, double* out_mse);

/* ---- self test ---- */

/* Randomized parallel-vs-reference decoder equivalence suite, including
 * forced-clip and forced-pad cases. Returns ECCO_E_INTERNAL on any mismatch;
 * out_blocks (optional) receives the number of blocks compared. */
ecco_status ecco_selftest(uint64_t seed, uint64_t* out_blocks);

#if defined(__cplusplus)
}
#endif

#endif /* ECCO_ECCO_H */
