// Command-line driver for the codec shared library. Talks to the C API only.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <ecco/ecco.h>

namespace {

int fail(ecco_status status) {
    std::fprintf(stderr, "ecco: error: %s\n", ecco_last_error());
    return status == ECCO_OK ? 1 : static_cast<int>(status);
}

#define CHECK_OK(call)                                                                   \
    do {                                                                                 \
        const ecco_status status_ = (call);                                              \
        if (status_ != ECCO_OK) return fail(status_);                                    \
    } while (0)

struct TensorGuard {
    ecco_tensor* p = nullptr;
    ~TensorGuard() { ecco_tensor_free(p); }
};
struct MetaGuard {
    ecco_meta* p = nullptr;
    ~MetaGuard() { ecco_meta_free(p); }
};
struct BlobGuard {
    ecco_blob* p = nullptr;
    ~BlobGuard() { ecco_blob_free(p); }
};
struct LogGuard {
    ecco_log* p = nullptr;
    ~LogGuard() { ecco_log_free(p); }
};

std::vector<uint32_t> parse_u32_list(const std::string& csv) {
    std::vector<uint32_t> out;
    size_t pos = 0;
    while (pos < csv.size()) {
        const size_t comma = csv.find(',', pos);
        const std::string item = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
        out.push_back(static_cast<uint32_t>(std::stoul(item)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"entropy-aware cache compression codec"};
    app.require_subcommand(1);

    // ---- calibrate ----
    auto* cal = app.add_subcommand("calibrate", "derive shared patterns and codebooks");
    std::string cal_input, cal_out, cal_mode = "weight", cal_weights, cal_coding = "fixed";
    uint32_t cal_s = 0, cal_h = 4;
    uint64_t cal_seed = 0;
    cal->add_option("--input", cal_input, "input tensor (.ecct)")->required();
    cal->add_option("--mode", cal_mode, "weight|kv")
        ->check(CLI::IsMember({"weight", "kv"}));
    cal->add_option("--s", cal_s, "shared pattern count (default 64 weight, 16 kv)");
    cal->add_option("--h", cal_h, "codebooks per pattern");
    cal->add_option("--seed", cal_seed, "calibration seed");
    cal->add_option("--weights", cal_weights, "per-column importance tensor (.ecct)");
    cal->add_option("--pattern-coding", cal_coding, "fixed|huffman pattern index field")
        ->check(CLI::IsMember({"fixed", "huffman"}));
    cal->add_option("--out", cal_out, "output metadata (.eccm)")->required();

    // ---- compress ----
    auto* cmp = app.add_subcommand("compress", "encode a tensor into fixed 64-byte blocks");
    std::string cmp_input, cmp_meta, cmp_out, cmp_log, cmp_ratio = "4x",
                cmp_decoder = "reference";
    cmp->add_option("--input", cmp_input, "input tensor (.ecct)")->required();
    cmp->add_option("--meta", cmp_meta, "metadata (.eccm), required for 4x");
    cmp->add_option("--ratio", cmp_ratio, "4x|2x")->check(CLI::IsMember({"4x", "2x"}));
    cmp->add_option("--decoder", cmp_decoder,
                    "decoder used for per-group log MSE: reference|parallel")
        ->check(CLI::IsMember({"reference", "parallel"}));
    cmp->add_option("--out", cmp_out, "output blob (.eccb)")->required();
    cmp->add_option("--log", cmp_log, "JSON-lines encode log");

    // ---- decompress ----
    auto* dec = app.add_subcommand("decompress", "decode a blob back to a tensor");
    std::string dec_input, dec_meta, dec_out, dec_decoder = "reference", dec_trace;
    dec->add_option("--input", dec_input, "input blob (.eccb)")->required();
    dec->add_option("--meta", dec_meta, "metadata (.eccm), required for 4x");
    dec->add_option("--decoder", dec_decoder, "reference|parallel")
        ->check(CLI::IsMember({"reference", "parallel"}));
    dec->add_option("--trace", dec_trace, "parallel-decoder trace dump (JSON lines)");
    dec->add_option("--out", dec_out, "output tensor (.ecct)")->required();

    // ---- report ----
    auto* rep = app.add_subcommand("report", "quality metrics for a reconstruction");
    std::string rep_orig, rep_recon, rep_log, rep_csv, rep_json;
    rep->add_option("--orig", rep_orig, "original tensor (.ecct)")->required();
    rep->add_option("--recon", rep_recon, "reconstructed tensor (.ecct)")->required();
    rep->add_option("--log", rep_log, "encode log for entropy/clip/pad metrics");
    rep->add_option("--csv", rep_csv, "write CSV report");
    rep->add_option("--json", rep_json, "write JSON report");

    // ---- dse ----
    auto* dse = app.add_subcommand("dse", "sweep pattern/codebook counts, print MSE table");
    std::string dse_input, dse_s = "4,16,64", dse_h = "1,4", dse_csv, dse_mode = "weight";
    uint64_t dse_seed = 0;
    dse->add_option("--input", dse_input, "input tensor (.ecct)")->required();
    dse->add_option("--s", dse_s, "comma-separated pattern counts");
    dse->add_option("--h", dse_h, "comma-separated codebook counts");
    dse->add_option("--seed", dse_seed, "calibration seed");
    dse->add_option("--mode", dse_mode, "weight|kv")->check(CLI::IsMember({"weight", "kv"}));
    dse->add_option("--csv", dse_csv, "write the table as CSV");

    // ---- selftest ----
    auto* self = app.add_subcommand("selftest", "parallel vs reference decoder equivalence");
    uint64_t self_seed = 0;
    self->add_option("--seed", self_seed, "randomization seed");

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a synthetic tensor");
    std::string gen_out, gen_dist = "gaussian";
    uint64_t gen_rows = 0, gen_cols = 0, gen_seed = 0;
    double gen_scale = 1.0;
    gen->add_option("--rows", gen_rows, "rows")->required();
    gen->add_option("--cols", gen_cols, "columns")->required();
    gen->add_option("--dist", gen_dist, "gaussian|laplacian|uniform")
        ->check(CLI::IsMember({"gaussian", "laplacian", "uniform"}));
    gen->add_option("--scale", gen_scale, "distribution scale");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output tensor (.ecct)")->required();

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand(cal)) {
        TensorGuard input;
        CHECK_OK(ecco_tensor_load(cal_input.c_str(), &input.p));
        TensorGuard weights;
        std::vector<float> column_weights;
        if (!cal_weights.empty()) {
            CHECK_OK(ecco_tensor_load(cal_weights.c_str(), &weights.p));
            const uint64_t n = ecco_tensor_rows(weights.p) * ecco_tensor_cols(weights.p);
            if (n != ecco_tensor_cols(input.p)) {
                std::fprintf(stderr, "ecco: error: weight tensor must have one entry per column\n");
                return 1;
            }
            const uint16_t* bits = ecco_tensor_data(weights.p);
            column_weights.resize(n);
            for (uint64_t i = 0; i < n; ++i) {
                column_weights[i] = static_cast<float>(ecco_fp16_to_double(bits[i]));
            }
        }
        ecco_calib_params params{};
        params.patterns = cal_s;
        params.codebooks = cal_h;
        params.seed = cal_seed;
        params.mode = cal_mode == "kv" ? ECCO_MODE_KV : ECCO_MODE_WEIGHT;
        params.pattern_coding = cal_coding == "huffman" ? ECCO_PATTERN_CODING_HUFFMAN
                                                        : ECCO_PATTERN_CODING_FIXED;
        params.column_weights = column_weights.empty() ? nullptr : column_weights.data();
        MetaGuard meta;
        CHECK_OK(ecco_calibrate(input.p, &params, &meta.p));
        CHECK_OK(ecco_meta_save(meta.p, cal_out.c_str()));
        std::printf("calibrated %s: S=%u H=%u -> %s\n", cal_input.c_str(),
                    ecco_meta_patterns(meta.p), ecco_meta_codebooks(meta.p),
                    cal_out.c_str());
        return 0;
    }

    if (app.got_subcommand(cmp)) {
        TensorGuard input;
        CHECK_OK(ecco_tensor_load(cmp_input.c_str(), &input.p));
        MetaGuard meta;
        const bool is4x = cmp_ratio == "4x";
        if (is4x) {
            if (cmp_meta.empty()) {
                std::fprintf(stderr, "ecco: error: --ratio 4x requires --meta\n");
                return 1;
            }
            CHECK_OK(ecco_meta_load(cmp_meta.c_str(), &meta.p));
        }
        BlobGuard blob;
        LogGuard log;
        const bool want_log = is4x && !cmp_log.empty();
        CHECK_OK(ecco_compress(input.p, meta.p, is4x ? ECCO_RATIO_4X : ECCO_RATIO_2X,
                               &blob.p, want_log ? &log.p : nullptr));
        if (!is4x && !cmp_log.empty()) {
            std::fprintf(stderr, "ecco: error: --log is only defined for --ratio 4x\n");
            return 1;
        }
        if (want_log) {
            CHECK_OK(ecco_log_add_mse(log.p, input.p, meta.p,
                                      cmp_decoder == "parallel" ? ECCO_DECODER_PARALLEL
                                                                : ECCO_DECODER_REFERENCE));
            CHECK_OK(ecco_log_save(log.p, cmp_log.c_str()));
        }
        CHECK_OK(ecco_blob_save(blob.p, cmp_out.c_str()));
        std::printf("compressed %s: %" PRIu64 " groups, %" PRIu64 " bytes -> %s\n",
                    cmp_input.c_str(), ecco_blob_groups(blob.p), ecco_blob_bytes(blob.p),
                    cmp_out.c_str());
        return 0;
    }

    if (app.got_subcommand(dec)) {
        BlobGuard blob;
        CHECK_OK(ecco_blob_load(dec_input.c_str(), &blob.p));
        MetaGuard meta;
        if (ecco_blob_ratio(blob.p) == ECCO_RATIO_4X) {
            if (dec_meta.empty()) {
                std::fprintf(stderr, "ecco: error: 4x blob requires --meta\n");
                return 1;
            }
            CHECK_OK(ecco_meta_load(dec_meta.c_str(), &meta.p));
        }
        TensorGuard out;
        CHECK_OK(ecco_decompress(blob.p, meta.p,
                                 dec_decoder == "parallel" ? ECCO_DECODER_PARALLEL
                                                           : ECCO_DECODER_REFERENCE,
                                 dec_trace.empty() ? nullptr : dec_trace.c_str(), &out.p));
        CHECK_OK(ecco_tensor_save(out.p, dec_out.c_str()));
        std::printf("decompressed %s: %" PRIu64 "x%" PRIu64 " -> %s\n", dec_input.c_str(),
                    ecco_tensor_rows(out.p), ecco_tensor_cols(out.p), dec_out.c_str());
        return 0;
    }

    if (app.got_subcommand(rep)) {
        ecco_report_stats stats{};
        CHECK_OK(ecco_report_files(rep_orig.c_str(), rep_recon.c_str(),
                                   rep_log.empty() ? nullptr : rep_log.c_str(),
                                   rep_csv.empty() ? nullptr : rep_csv.c_str(),
                                   rep_json.empty() ? nullptr : rep_json.c_str(), &stats));
        std::printf("mse %.10g\n", stats.mse);
        if (stats.has_log) {
            std::printf("entropy_bits %.10g\nbit_efficiency %.10g\nclip_ratio %.10g\n"
                        "pad_ratio %.10g\n",
                        stats.entropy_bits, stats.bit_efficiency, stats.clip_ratio,
                        stats.pad_ratio);
        }
        return 0;
    }

    if (app.got_subcommand(dse)) {
        TensorGuard input;
        CHECK_OK(ecco_tensor_load(dse_input.c_str(), &input.p));
        const std::vector<uint32_t> s_values = parse_u32_list(dse_s);
        const std::vector<uint32_t> h_values = parse_u32_list(dse_h);
        std::vector<double> mse(s_values.size() * h_values.size());
        CHECK_OK(ecco_dse(input.p, s_values.data(), s_values.size(), h_values.data(),
                          h_values.size(), dse_seed,
                          dse_mode == "kv" ? ECCO_MODE_KV : ECCO_MODE_WEIGHT, mse.data()));
        std::printf("%8s %8s %16s\n", "S", "H", "mean_mse");
        FILE* csv = nullptr;
        if (!dse_csv.empty()) {
            csv = std::fopen(dse_csv.c_str(), "w");
            if (!csv) {
                std::fprintf(stderr, "ecco: error: cannot open %s\n", dse_csv.c_str());
                return 1;
            }
            std::fprintf(csv, "s,h,mean_mse\n");
        }
        for (size_t i = 0; i < s_values.size(); ++i) {
            for (size_t j = 0; j < h_values.size(); ++j) {
                const double v = mse[i * h_values.size() + j];
                std::printf("%8u %8u %16.10g\n", s_values[i], h_values[j], v);
                if (csv) std::fprintf(csv, "%u,%u,%.17g\n", s_values[i], h_values[j], v);
            }
        }
        if (csv) std::fclose(csv);
        return 0;
    }

    if (app.got_subcommand(self)) {
        uint64_t blocks = 0;
        const ecco_status status = ecco_selftest(self_seed, &blocks);
        if (status != ECCO_OK) {
            std::fprintf(stderr, "selftest FAILED: %s\n", ecco_last_error());
            return static_cast<int>(status);
        }
        std::printf("selftest passed: %" PRIu64 " blocks, parallel == reference\n", blocks);
        return 0;
    }

    if (app.got_subcommand(gen)) {
        ecco_distribution dist = ECCO_DIST_GAUSSIAN;
        if (gen_dist == "laplacian") dist = ECCO_DIST_LAPLACIAN;
        if (gen_dist == "uniform") dist = ECCO_DIST_UNIFORM;
        TensorGuard t;
        CHECK_OK(ecco_tensor_generate(gen_rows, gen_cols, dist, gen_scale, gen_seed, &t.p));
        CHECK_OK(ecco_tensor_save(t.p, gen_out.c_str()));
        std::printf("generated %" PRIu64 "x%" PRIu64 " %s tensor -> %s\n", gen_rows,
                    gen_cols, gen_dist.c_str(), gen_out.c_str());
        return 0;
    }

    return 1;
}
