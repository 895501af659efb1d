#include "calibration.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "rng.hpp"

namespace ecco {

namespace {

constexpr double kSeparation = 0x1.0p-20;

// Sorted, strictly ascending, inside [-1, 1], every centroid exactly
// representable in binary32. Duplicate-collapse handling for degenerate
// groups: equal centroids get separated by 2^-20 and pushed back in range.
KMeansPattern finish_pattern(std::array<double, kPatternCentroids> c) {
    std::sort(c.begin(), c.end());
    for (double& v : c) {
        v = std::clamp(v, -1.0, 1.0);
    }
    for (int i = 1; i < kPatternCentroids; ++i) {
        if (c[i] <= c[i - 1]) c[i] = c[i - 1] + kSeparation;
    }
    std::array<float, kPatternCentroids> f{};
    for (int i = 0; i < kPatternCentroids; ++i) {
        f[i] = static_cast<float>(c[i]);
    }
    for (int i = 1; i < kPatternCentroids; ++i) {
        while (f[i] <= f[i - 1]) f[i] = std::nextafter(f[i], 2.0f);
    }
    if (f[kPatternCentroids - 1] > 1.0f) {
        f[kPatternCentroids - 1] = 1.0f;
        for (int i = kPatternCentroids - 2; i >= 0; --i) {
            while (f[i] >= f[i + 1]) f[i] = std::nextafter(f[i], -2.0f);
        }
    }
    KMeansPattern p;
    for (int i = 0; i < kPatternCentroids; ++i) {
        p.centroids[i] = static_cast<double>(f[i]);
    }
    return p;
}

void validate_pattern(const KMeansPattern& p) {
    for (int i = 0; i < kPatternCentroids; ++i) {
        const double v = p.centroids[i];
        if (!(v >= -1.0 && v <= 1.0)) {
            raise(ErrorCode::format, "pattern centroid outside [-1, 1]");
        }
        if (i > 0 && !(v > p.centroids[i - 1])) {
            raise(ErrorCode::format, "pattern centroids not strictly ascending");
        }
        if (static_cast<double>(static_cast<float>(v)) != v) {
            raise(ErrorCode::format, "pattern centroid not binary32-exact");
        }
    }
}

size_t nearest_centroid(const KMeansPattern& p, double v) {
    const auto& c = p.centroids;
    const size_t hi = static_cast<size_t>(
        std::lower_bound(c.begin(), c.end(), v) - c.begin());
    if (hi == 0) return 0;
    if (hi == c.size()) return c.size() - 1;
    const double down = v - c[hi - 1];
    const double up = c[hi] - v;
    return up < down ? hi : hi - 1; // tie goes to the lower index
}

} // namespace

void TensorMeta::finalize() {
    if (shared_patterns == 0 || codebooks_per_pattern == 0) {
        raise(ErrorCode::format, "metadata must have at least one pattern and codebook");
    }
    if (library.size() != shared_patterns) {
        raise(ErrorCode::format, "pattern library size mismatch");
    }
    for (const KMeansPattern& p : library.patterns) {
        validate_pattern(p);
    }
    if (codebooks.size() != static_cast<size_t>(shared_patterns) * codebooks_per_pattern) {
        raise(ErrorCode::format, "codebook grid size mismatch");
    }
    for (const HuffmanCodebook& cb : codebooks) {
        validate_codebook(cb);
    }
    if (pattern_index_coding == PatternIndexCoding::huffman) {
        if (pattern_index_code.size() != shared_patterns) {
            raise(ErrorCode::format, "pattern index code size mismatch");
        }
        if (shared_patterns > 1) {
            std::vector<int> lengths;
            for (const CodeEntry& e : pattern_index_code) {
                if (e.length < 1 || e.length > 16) {
                    raise(ErrorCode::format, "pattern index code length outside [1, 16]");
                }
                lengths.push_back(e.length);
            }
            if (kraft_sum_scaled(lengths, 16) != (1ull << 16)) {
                raise(ErrorCode::format, "pattern index code Kraft sum is not 1");
            }
            if (!is_prefix_free(pattern_index_code)) {
                raise(ErrorCode::format, "pattern index code is not prefix-free");
            }
        }
    } else if (!pattern_index_code.empty()) {
        raise(ErrorCode::format, "unexpected pattern index code table");
    }

    lookahead.clear();
    lookahead.reserve(codebooks.size());
    for (const HuffmanCodebook& cb : codebooks) {
        lookahead.push_back(build_lookahead_table(cb));
    }
}

NormalizedGroup normalize_group(const std::array<double, kGroupSize4x>& values,
                                PowerOfTwoScale tensor_scale) {
    NormalizedGroup g;
    double absmax = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double a = std::fabs(values[i]);
        if (a > absmax) {
            absmax = a;
            g.absmax_index = static_cast<int>(i);
        }
    }
    const double signed_absmax = values[static_cast<size_t>(g.absmax_index)];
    if (absmax == 0.0) {
        g.scale_code = 0;
        g.descale = 0.0;
        return g; // documented degenerate case: all zeros
    }
    g.scale_code = fp8_quantize(signed_absmax / tensor_scale.value(),
                                Fp8Rounding::away_from_zero);
    g.descale = fp8_dequantize(g.scale_code) * tensor_scale.value();
    const double mag = std::fabs(g.descale);
    for (size_t i = 0; i < values.size(); ++i) {
        g.values[i] = values[i] / mag;
    }
    return g;
}

KMeansPattern fit_group_pattern(const std::vector<double>& values,
                                const std::vector<double>& weights,
                                const CalibrationConfig& cfg, uint64_t seed) {
    KMeansOptions opt;
    opt.clusters = kPatternCentroids;
    opt.max_iterations = cfg.kmeans_iterations;
    opt.restarts = cfg.kmeans_restarts;
    const KMeansResult res = kmeans(values, 1, weights, opt, seed);
    std::array<double, kPatternCentroids> c{};
    std::copy(res.centroids.begin(), res.centroids.end(), c.begin());
    return finish_pattern(c);
}

PatternLibrary cluster_shared_patterns(const std::vector<KMeansPattern>& patterns,
                                       uint32_t shared, const CalibrationConfig& cfg,
                                       uint64_t seed) {
    if (patterns.size() < shared) {
        raise(ErrorCode::invalid_argument, "insufficient groups for requested pattern count");
    }
    std::vector<double> points;
    points.reserve(patterns.size() * kPatternCentroids);
    for (const KMeansPattern& p : patterns) {
        points.insert(points.end(), p.centroids.begin(), p.centroids.end());
    }
    KMeansOptions opt;
    opt.clusters = static_cast<int>(shared);
    opt.max_iterations = cfg.kmeans_iterations;
    opt.restarts = cfg.kmeans_restarts;
    const KMeansResult res = kmeans(points, kPatternCentroids, {}, opt, seed);

    PatternLibrary lib;
    lib.patterns.resize(shared);
    for (uint32_t s = 0; s < shared; ++s) {
        std::array<double, kPatternCentroids> c{};
        std::copy(res.centroids.begin() + s * kPatternCentroids,
                  res.centroids.begin() + (s + 1) * kPatternCentroids, c.begin());
        lib.patterns[s] = finish_pattern(c);
    }
    return lib;
}

std::array<uint8_t, kGroupSize4x> map_symbols(const std::array<double, kGroupSize4x>& norm,
                                              int absmax_index,
                                              const KMeansPattern& pattern) {
    std::array<uint8_t, kGroupSize4x> symbols{};
    for (size_t i = 0; i < norm.size(); ++i) {
        symbols[i] = (static_cast<int>(i) == absmax_index)
                         ? kScaleSymbol
                         : static_cast<uint8_t>(nearest_centroid(pattern, norm[i]));
    }
    return symbols;
}

PatternAssignment assign_pattern_mse(const std::array<double, kGroupSize4x>& norm,
                                     int absmax_index, const PatternLibrary& library) {
    if (library.size() == 0) {
        raise(ErrorCode::invalid_argument, "empty pattern library");
    }
    uint32_t best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (uint32_t p = 0; p < library.size(); ++p) {
        const KMeansPattern& pat = library.patterns[p];
        double sse = 0.0;
        for (size_t i = 0; i < norm.size(); ++i) {
            if (static_cast<int>(i) == absmax_index) continue;
            const double d = norm[i] - pat.centroids[nearest_centroid(pat, norm[i])];
            sse += d * d;
        }
        if (sse < best_sse) {
            best_sse = sse;
            best = p;
        }
    }
    PatternAssignment a;
    a.pattern = best;
    a.symbols = map_symbols(norm, absmax_index, library.patterns[best]);
    return a;
}

uint32_t select_pattern_minmax(const std::array<double, kGroupSize4x>& norm,
                               int absmax_index, const PatternLibrary& library) {
    if (library.size() == 0) {
        raise(ErrorCode::invalid_argument, "empty pattern library");
    }
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < norm.size(); ++i) {
        if (static_cast<int>(i) == absmax_index) continue;
        gmin = std::min(gmin, norm[i]);
        gmax = std::max(gmax, norm[i]);
    }
    uint32_t best = 0;
    double best_fit = std::numeric_limits<double>::infinity();
    for (uint32_t p = 0; p < library.size(); ++p) {
        const auto& c = library.patterns[p].centroids;
        const double dlo = gmin - c.front();
        const double dhi = gmax - c.back();
        const double fit = dlo * dlo + dhi * dhi;
        if (fit < best_fit) {
            best_fit = fit;
            best = p;
        }
    }
    return best;
}

std::vector<HuffmanCodebook> derive_codebooks(const std::vector<uint32_t>& group_patterns,
                                              const std::vector<std::array<uint32_t, 16>>& histograms,
                                              uint32_t shared, uint32_t books,
                                              const CalibrationConfig& cfg, uint64_t seed) {
    if (group_patterns.size() != histograms.size()) {
        raise(ErrorCode::invalid_argument, "assignment/histogram size mismatch");
    }
    std::vector<HuffmanCodebook> grid(static_cast<size_t>(shared) * books);

    parallel_for_index(shared, [&](size_t p) {
        std::vector<double> points;
        for (size_t g = 0; g < group_patterns.size(); ++g) {
            if (group_patterns[g] != p) continue;
            double total = 0.0;
            for (uint32_t c : histograms[g]) total += c;
            for (uint32_t c : histograms[g]) {
                points.push_back(total > 0 ? c / total : 0.0);
            }
        }
        if (points.empty()) {
            for (uint32_t h = 0; h < books; ++h) {
                grid[p * books + h] = uniform_codebook();
            }
            return;
        }
        KMeansOptions opt;
        opt.clusters = static_cast<int>(books);
        opt.max_iterations = cfg.kmeans_iterations;
        opt.restarts = cfg.kmeans_restarts;
        const KMeansResult res =
            kmeans(points, 16, {}, opt, derive_seed(seed, 0xB00C, p));
        for (uint32_t h = 0; h < books; ++h) {
            std::array<double, 16> freqs{};
            for (size_t j = 0; j < 16; ++j) {
                // Back to count scale so the codebook builder's +1 smoothing
                // stays a mild prior.
                freqs[j] = std::max(0.0, res.centroids[h * 16 + j]) *
                           static_cast<double>(kGroupSize4x);
            }
            grid[p * books + h] = build_codebook(freqs);
        }
    });
    return grid;
}

CalibrationSession::CalibrationSession(const TensorF16& tensor, const CalibrationConfig& cfg)
    : tensor_(tensor), cfg_(cfg) {
    partition_ = partition_groups(tensor, kGroupSize4x);
    if (!cfg_.column_weights.empty() && cfg_.column_weights.size() != tensor.cols) {
        raise(ErrorCode::invalid_argument, "column weight count does not match tensor columns");
    }
    const double absmax = tensor_absmax(tensor);
    tensor_scale_ = absmax > 0.0 ? tensor_scale_for(absmax) : PowerOfTwoScale{0};

    group_patterns_.resize(partition_.group_count);
    parallel_for_index(partition_.group_count, [&](size_t g) {
        const std::array<double, kGroupSize4x> vals = load_group4x(tensor_, g);
        const NormalizedGroup ng = normalize_group(vals, tensor_scale_);
        std::vector<double> pts;
        std::vector<double> wts;
        pts.reserve(kGroupSize4x - 1);
        if (!cfg_.column_weights.empty()) wts.reserve(kGroupSize4x - 1);
        for (size_t i = 0; i < kGroupSize4x; ++i) {
            if (static_cast<int>(i) == ng.absmax_index) continue;
            pts.push_back(ng.values[i]);
            if (!cfg_.column_weights.empty()) {
                const uint64_t flat = g * kGroupSize4x + i;
                wts.push_back(cfg_.column_weights[static_cast<size_t>(flat % tensor_.cols)]);
            }
        }
        group_patterns_[g] =
            fit_group_pattern(pts, wts, cfg_, derive_seed(cfg_.seed, 0xF17, g));
    });
}

TensorMeta CalibrationSession::calibrate_with(uint32_t shared, uint32_t books) const {
    if (shared == 0 || books == 0) {
        raise(ErrorCode::invalid_argument, "pattern and codebook counts must be positive");
    }
    TensorMeta meta;
    meta.mode = cfg_.mode;
    meta.pattern_index_coding = cfg_.pattern_index_coding;
    meta.tensor_scale = tensor_scale_;
    meta.shared_patterns = shared;
    meta.codebooks_per_pattern = books;
    meta.library =
        cluster_shared_patterns(group_patterns_, shared, cfg_, derive_seed(cfg_.seed, 0xC1A5));

    const size_t groups = partition_.group_count;
    std::vector<uint32_t> assigned(groups);
    std::vector<std::array<uint32_t, 16>> histograms(groups);
    parallel_for_index(groups, [&](size_t g) {
        const std::array<double, kGroupSize4x> vals = load_group4x(tensor_, g);
        const NormalizedGroup ng = normalize_group(vals, tensor_scale_);
        uint32_t pattern;
        if (cfg_.mode == CompressionMode::kv) {
            pattern = select_pattern_minmax(ng.values, ng.absmax_index, meta.library);
        } else {
            pattern = assign_pattern_mse(ng.values, ng.absmax_index, meta.library).pattern;
        }
        const auto symbols =
            map_symbols(ng.values, ng.absmax_index, meta.library.patterns[pattern]);
        assigned[g] = pattern;
        histograms[g].fill(0);
        for (uint8_t s : symbols) histograms[g][s] += 1;
    });

    meta.codebooks = derive_codebooks(assigned, histograms, shared, books, cfg_,
                                      derive_seed(cfg_.seed, 0xDE5));
    if (cfg_.pattern_index_coding == PatternIndexCoding::huffman) {
        std::vector<double> freqs(shared, 0.0);
        for (uint32_t p : assigned) freqs[p] += 1.0;
        meta.pattern_index_code = build_symbol_code(freqs);
    }
    meta.finalize();
    return meta;
}

TensorMeta calibrate(const TensorF16& tensor, const CalibrationConfig& cfg) {
    CalibrationSession session(tensor, cfg);
    return session.calibrate_with(cfg.effective_patterns(), cfg.codebooks_per_pattern);
}

} // namespace ecco
