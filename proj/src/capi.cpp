#include "ecco/ecco.h"

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "calibration.hpp"
#include "codec2x.hpp"
#include "codec4x.hpp"
#include "error.hpp"
#include "formats.hpp"
#include "metrics.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "selftest.hpp"
#include "tensor.hpp"

struct ecco_tensor {
    ecco::TensorF16 t;
};
struct ecco_meta {
    ecco::TensorMeta m;
};
struct ecco_blob {
    ecco::CompressedBlob b;
};
struct ecco_log {
    std::vector<ecco::EncodeStats> stats;
    std::vector<double> mse;
};

namespace {

thread_local std::string g_last_error;

ecco_status translate(const ecco::Error& e) {
    g_last_error = e.what();
    switch (e.code()) {
    case ecco::ErrorCode::invalid_argument: return ECCO_E_INVALID_ARGUMENT;
    case ecco::ErrorCode::io: return ECCO_E_IO;
    case ecco::ErrorCode::format: return ECCO_E_FORMAT;
    case ecco::ErrorCode::overflow: return ECCO_E_OVERFLOW;
    case ecco::ErrorCode::internal: return ECCO_E_INTERNAL;
    }
    return ECCO_E_INTERNAL;
}

template <typename Fn>
ecco_status guarded(Fn&& fn) {
    try {
        fn();
        return ECCO_OK;
    } catch (const ecco::Error& e) {
        return translate(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return ECCO_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return ECCO_E_INTERNAL;
    }
}

ecco_status fail_invalid(const char* message) {
    g_last_error = message;
    return ECCO_E_INVALID_ARGUMENT;
}

ecco::DecoderKind to_decoder(ecco_decoder d) {
    return d == ECCO_DECODER_PARALLEL ? ecco::DecoderKind::parallel
                                      : ecco::DecoderKind::reference;
}

} // namespace

extern "C" {

const char* ecco_version(void) { return "1.0.0"; }

const char* ecco_last_error(void) { return g_last_error.c_str(); }

double ecco_fp16_to_double(uint16_t bits) { return ecco::fp16_to_double(bits); }

uint16_t ecco_fp16_from_double(double v) { return ecco::double_to_fp16(v); }

ecco_status ecco_tensor_create(uint64_t rows, uint64_t cols,
                               const uint16_t* fp16_bits, ecco_tensor** out) {
    if (!fp16_bits || !out) return fail_invalid("null argument");
    return guarded([&] {
        std::vector<uint16_t> bits(fp16_bits, fp16_bits + rows * cols);
        *out = new ecco_tensor{ecco::make_tensor(rows, cols, std::move(bits))};
    });
}

ecco_status ecco_tensor_generate(uint64_t rows, uint64_t cols, ecco_distribution dist,
                                 double scale, uint64_t seed, ecco_tensor** out) {
    if (!out) return fail_invalid("null argument");
    return guarded([&] {
        if (rows == 0 || cols == 0) {
            ecco::raise(ecco::ErrorCode::invalid_argument, "empty tensor");
        }
        ecco::Rng rng(ecco::derive_seed(seed, 0x9E77));
        std::vector<uint16_t> bits(static_cast<size_t>(rows * cols));
        for (uint16_t& b : bits) {
            double v;
            switch (dist) {
            case ECCO_DIST_LAPLACIAN: v = rng.laplace(); break;
            case ECCO_DIST_UNIFORM: v = rng.uniform(-1.0, 1.0); break;
            case ECCO_DIST_GAUSSIAN: default: v = rng.gaussian(); break;
            }
            v *= scale;
            // Stay inside the finite fp16 range.
            if (v > 65504.0) v = 65504.0;
            if (v < -65504.0) v = -65504.0;
            b = ecco::double_to_fp16(v);
        }
        *out = new ecco_tensor{ecco::make_tensor(rows, cols, std::move(bits))};
    });
}

ecco_status ecco_tensor_load(const char* path, ecco_tensor** out) {
    if (!path || !out) return fail_invalid("null argument");
    return guarded([&] { *out = new ecco_tensor{ecco::load_tensor(path)}; });
}

ecco_status ecco_tensor_save(const ecco_tensor* t, const char* path) {
    if (!t || !path) return fail_invalid("null argument");
    return guarded([&] { ecco::save_tensor(t->t, path); });
}

uint64_t ecco_tensor_rows(const ecco_tensor* t) { return t ? t->t.rows : 0; }
uint64_t ecco_tensor_cols(const ecco_tensor* t) { return t ? t->t.cols : 0; }
const uint16_t* ecco_tensor_data(const ecco_tensor* t) {
    return t ? t->t.values.data() : nullptr;
}
void ecco_tensor_free(ecco_tensor* t) { delete t; }

ecco_status ecco_tensor_mse(const ecco_tensor* a, const ecco_tensor* b, double* out) {
    if (!a || !b || !out) return fail_invalid("null argument");
    return guarded([&] { *out = ecco::tensor_mse(a->t, b->t); });
}

ecco_status ecco_calibrate(const ecco_tensor* t, const ecco_calib_params* params,
                           ecco_meta** out) {
    if (!t || !params || !out) return fail_invalid("null argument");
    return guarded([&] {
        ecco::CalibrationConfig cfg;
        cfg.shared_patterns = params->patterns;
        cfg.codebooks_per_pattern = params->codebooks ? params->codebooks : 4;
        cfg.seed = params->seed;
        cfg.mode = params->mode == ECCO_MODE_KV ? ecco::CompressionMode::kv
                                                : ecco::CompressionMode::weight;
        cfg.pattern_index_coding = params->pattern_coding == ECCO_PATTERN_CODING_HUFFMAN
                                       ? ecco::PatternIndexCoding::huffman
                                       : ecco::PatternIndexCoding::fixed;
        if (params->column_weights) {
            cfg.column_weights.assign(params->column_weights,
                                      params->column_weights + t->t.cols);
        }
        *out = new ecco_meta{ecco::calibrate(t->t, cfg)};
    });
}

ecco_status ecco_meta_load(const char* path, ecco_meta** out) {
    if (!path || !out) return fail_invalid("null argument");
    return guarded([&] { *out = new ecco_meta{ecco::load_meta(path)}; });
}

ecco_status ecco_meta_save(const ecco_meta* m, const char* path) {
    if (!m || !path) return fail_invalid("null argument");
    return guarded([&] { ecco::save_meta(m->m, path); });
}

uint32_t ecco_meta_patterns(const ecco_meta* m) { return m ? m->m.shared_patterns : 0; }
uint32_t ecco_meta_codebooks(const ecco_meta* m) {
    return m ? m->m.codebooks_per_pattern : 0;
}
ecco_mode ecco_meta_mode(const ecco_meta* m) {
    return (m && m->m.mode == ecco::CompressionMode::kv) ? ECCO_MODE_KV : ECCO_MODE_WEIGHT;
}
void ecco_meta_free(ecco_meta* m) { delete m; }

ecco_status ecco_compress(const ecco_tensor* t, const ecco_meta* m, ecco_ratio ratio,
                          ecco_blob** out, ecco_log** out_log) {
    if (!t || !out) return fail_invalid("null argument");
    if (ratio == ECCO_RATIO_4X && !m) {
        return fail_invalid("4x compression requires metadata");
    }
    return guarded([&] {
        if (ratio == ECCO_RATIO_4X) {
            std::vector<ecco::EncodeStats> stats;
            ecco::CompressedBlob blob =
                ecco::compress_4x(t->t, m->m, out_log ? &stats : nullptr);
            *out = new ecco_blob{std::move(blob)};
            if (out_log) *out_log = new ecco_log{std::move(stats), {}};
        } else {
            if (out_log) {
                ecco::raise(ecco::ErrorCode::invalid_argument,
                            "encode logs are only defined for the 4x codec");
            }
            *out = new ecco_blob{ecco::compress_2x(t->t)};
        }
    });
}

ecco_status ecco_decompress(const ecco_blob* b, const ecco_meta* m,
                            ecco_decoder decoder, const char* trace_path,
                            ecco_tensor** out) {
    if (!b || !out) return fail_invalid("null argument");
    return guarded([&] {
        if (trace_path && b->b.mode == ecco::BlobMode::ratio4x) {
            std::ofstream trace(trace_path, std::ios::trunc);
            if (!trace) {
                ecco::raise(ecco::ErrorCode::io,
                            std::string("cannot open ") + trace_path + " for writing");
            }
            *out = new ecco_tensor{ecco::decompress(b->b, m ? &m->m : nullptr,
                                                    ecco::DecoderKind::parallel, &trace)};
        } else {
            *out = new ecco_tensor{
                ecco::decompress(b->b, m ? &m->m : nullptr, to_decoder(decoder))};
        }
    });
}

ecco_status ecco_blob_load(const char* path, ecco_blob** out) {
    if (!path || !out) return fail_invalid("null argument");
    return guarded([&] { *out = new ecco_blob{ecco::load_blob(path)}; });
}

ecco_status ecco_blob_save(const ecco_blob* b, const char* path) {
    if (!b || !path) return fail_invalid("null argument");
    return guarded([&] { ecco::save_blob(b->b, path); });
}

ecco_ratio ecco_blob_ratio(const ecco_blob* b) {
    return (b && b->b.mode == ecco::BlobMode::ratio2x) ? ECCO_RATIO_2X : ECCO_RATIO_4X;
}
uint64_t ecco_blob_groups(const ecco_blob* b) { return b ? b->b.group_count : 0; }
uint64_t ecco_blob_bytes(const ecco_blob* b) { return b ? b->b.data.size() : 0; }
void ecco_blob_free(ecco_blob* b) { delete b; }

ecco_status ecco_log_add_mse(ecco_log* log, const ecco_tensor* t, const ecco_meta* m,
                             ecco_decoder decoder) {
    if (!log || !t || !m) return fail_invalid("null argument");
    return guarded([&] {
        const ecco::RoundtripReport rep =
            ecco::roundtrip_mse(t->t, m->m, to_decoder(decoder));
        if (rep.group_mse.size() != log->stats.size()) {
            ecco::raise(ecco::ErrorCode::invalid_argument,
                        "tensor group count does not match the log");
        }
        log->mse = rep.group_mse;
    });
}

ecco_status ecco_log_save(const ecco_log* log, const char* path) {
    if (!log || !path) return fail_invalid("null argument");
    return guarded([&] { ecco::write_encode_log(path, log->stats, log->mse); });
}

uint64_t ecco_log_groups(const ecco_log* log) { return log ? log->stats.size() : 0; }

ecco_status ecco_log_ratios(const ecco_log* log, double* clip_ratio, double* pad_ratio) {
    if (!log || !clip_ratio || !pad_ratio) return fail_invalid("null argument");
    return guarded([&] {
        const ecco::ClipPadRatios r = ecco::clip_pad_report(log->stats);
        *clip_ratio = r.clip_ratio;
        *pad_ratio = r.pad_ratio;
    });
}

void ecco_log_free(ecco_log* log) { delete log; }

ecco_status ecco_report_files(const char* orig_path, const char* recon_path,
                              const char* log_path, const char* csv_path,
                              const char* json_path, ecco_report_stats* out) {
    if (!orig_path || !recon_path) return fail_invalid("null argument");
    return guarded([&] {
        const ecco::TensorF16 orig = ecco::load_tensor(orig_path);
        const ecco::TensorF16 recon = ecco::load_tensor(recon_path);
        std::vector<ecco::EncodeLogRecord> log;
        if (log_path) log = ecco::read_encode_log(log_path);
        const ecco::ReportStats stats =
            ecco::build_report(orig, recon, log_path ? &log : nullptr);
        if (csv_path) ecco::write_report_csv(stats, csv_path);
        if (json_path) ecco::write_report_json(stats, json_path);
        if (out) {
            out->mse = stats.mse;
            out->has_log = stats.has_log ? 1 : 0;
            out->entropy_bits = stats.mean_entropy;
            out->bit_efficiency = stats.eta;
            out->clip_ratio = stats.clip_ratio;
            out->pad_ratio = stats.pad_ratio;
        }
    });
}

ecco_status ecco_dse(const ecco_tensor* t, const uint32_t* s_values, size_t s_count,
                     const uint32_t* h_values, size_t h_count, uint64_t seed,
                     ecco_mode mode, double* out_mse) {
    if (!t || !s_values || !h_values || !out_mse) return fail_invalid("null argument");
    if (s_count == 0 || h_count == 0) return fail_invalid("empty sweep axis");
    return guarded([&] {
        ecco::CalibrationConfig cfg;
        cfg.seed = seed;
        cfg.mode = mode == ECCO_MODE_KV ? ecco::CompressionMode::kv
                                        : ecco::CompressionMode::weight;
        ecco::CalibrationSession session(t->t, cfg);
        for (size_t i = 0; i < s_count; ++i) {
            for (size_t j = 0; j < h_count; ++j) {
                const ecco::TensorMeta meta =
                    session.calibrate_with(s_values[i], h_values[j]);
                const ecco::RoundtripReport rep = ecco::roundtrip_mse(t->t, meta);
                out_mse[i * h_count + j] = rep.mean_mse;
            }
        }
    });
}

ecco_status ecco_selftest(uint64_t seed, uint64_t* out_blocks) {
    return guarded([&] {
        const uint64_t blocks = ecco::run_equivalence_selftest(seed);
        if (out_blocks) *out_blocks = blocks;
    });
}

} // extern "C"
