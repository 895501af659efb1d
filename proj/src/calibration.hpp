#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fp8.hpp"
#include "huffman.hpp"
#include "kmeans.hpp"
#include "tensor.hpp"

namespace ecco {

inline constexpr int kPatternCentroids = 15;
inline constexpr uint8_t kScaleSymbol = 15; // symbol reserved for the group absmax

// 15 strictly ascending centroids in [-1, 1]. Every value is exactly
// representable in binary32 so serialization round-trips bit-exactly.
struct KMeansPattern {
    std::array<double, kPatternCentroids> centroids{};
};

struct PatternLibrary {
    std::vector<KMeansPattern> patterns;

    size_t size() const { return patterns.size(); }
};

enum class CompressionMode : uint8_t {
    weight = 0,
    kv = 1,
};

enum class PatternIndexCoding : uint8_t {
    fixed = 0,
    huffman = 1,
};

struct CalibrationConfig {
    uint32_t shared_patterns = 0;      // 0 = mode default (64 weight, 16 kv)
    uint32_t codebooks_per_pattern = 4;
    uint64_t seed = 0;
    CompressionMode mode = CompressionMode::weight;
    PatternIndexCoding pattern_index_coding = PatternIndexCoding::fixed;
    int kmeans_iterations = 50;
    int kmeans_restarts = 4;
    std::vector<float> column_weights; // per-column importance, empty = uniform

    uint32_t effective_patterns() const {
        if (shared_patterns != 0) return shared_patterns;
        return mode == CompressionMode::kv ? 16u : 64u;
    }
};

// Everything a codec needs to process one tensor: scale, shared patterns and
// the per-pattern codebook grid, plus decode acceleration tables built by
// finalize().
struct TensorMeta {
    CompressionMode mode = CompressionMode::weight;
    PatternIndexCoding pattern_index_coding = PatternIndexCoding::fixed;
    PowerOfTwoScale tensor_scale;
    uint32_t shared_patterns = 0;      // S
    uint32_t codebooks_per_pattern = 0; // H
    PatternLibrary library;
    std::vector<HuffmanCodebook> codebooks;     // S*H, row-major by pattern
    std::vector<CodeEntry> pattern_index_code;  // S entries when huffman coding

    // Derived; not serialized.
    std::vector<LookaheadTable> lookahead;

    const HuffmanCodebook& codebook(uint32_t pattern, uint32_t book) const {
        return codebooks[pattern * codebooks_per_pattern + book];
    }
    const LookaheadTable& lookahead_for(uint32_t pattern, uint32_t book) const {
        return lookahead[pattern * codebooks_per_pattern + book];
    }

    // Validates all invariants and builds the decode tables. Must be called
    // after construction or deserialization.
    void finalize();
};

struct NormalizedGroup {
    uint8_t scale_code = 0;  // signed FP8 group scale (absmax / tensor scale)
    int absmax_index = 0;
    double descale = 0.0;    // fp8_dequantize(scale_code) * tensor scale, signed
    std::array<double, kGroupSize4x> values{}; // all magnitudes <= 1
};

// Two-level normalization: the group absmax, scaled by the per-tensor power
// of two, becomes an FP8 group scale rounded away from zero so that every
// normalized value stays inside [-1, 1]. All-zero groups normalize to +0.
NormalizedGroup normalize_group(const std::array<double, kGroupSize4x>& values,
                                PowerOfTwoScale tensor_scale);

// Weighted 15-cluster k-means over the 127 non-absmax values of one group.
KMeansPattern fit_group_pattern(const std::vector<double>& values,
                                const std::vector<double>& weights,
                                const CalibrationConfig& cfg, uint64_t seed);

// Second-level k-means over the per-group patterns, producing the shared
// library. Throws if there are fewer groups than requested patterns.
PatternLibrary cluster_shared_patterns(const std::vector<KMeansPattern>& patterns,
                                       uint32_t shared, const CalibrationConfig& cfg,
                                       uint64_t seed);

// Nearest-centroid symbols for one group under one pattern; ties go to the
// lower centroid index and the absmax element is always symbol 15.
std::array<uint8_t, kGroupSize4x> map_symbols(const std::array<double, kGroupSize4x>& norm,
                                              int absmax_index,
                                              const KMeansPattern& pattern);

struct PatternAssignment {
    uint32_t pattern = 0;
    std::array<uint8_t, kGroupSize4x> symbols{};
};

// Full-search pattern selection minimizing reconstruction squared error over
// the non-absmax elements (ties to the lower pattern index).
PatternAssignment assign_pattern_mse(const std::array<double, kGroupSize4x>& norm,
                                     int absmax_index, const PatternLibrary& library);

// Online selector: compares only the group min/max (absmax excluded) against
// each pattern's end centroids.
uint32_t select_pattern_minmax(const std::array<double, kGroupSize4x>& norm,
                               int absmax_index, const PatternLibrary& library);

// Per-pattern frequency clustering into H codebooks. Patterns with no
// assigned groups receive uniform codebooks.
std::vector<HuffmanCodebook> derive_codebooks(const std::vector<uint32_t>& group_patterns,
                                              const std::vector<std::array<uint32_t, 16>>& histograms,
                                              uint32_t shared, uint32_t books,
                                              const CalibrationConfig& cfg, uint64_t seed);

// Fits per-group patterns once; cheap to re-run the downstream stages for
// several (S, H) combinations. calibrate() below is the one-shot wrapper and
// produces bit-identical metadata for the same (S, H).
class CalibrationSession {
public:
    CalibrationSession(const TensorF16& tensor, const CalibrationConfig& cfg);

    TensorMeta calibrate_with(uint32_t shared, uint32_t books) const;

    const GroupPartition& partition() const { return partition_; }

private:
    const TensorF16& tensor_;
    CalibrationConfig cfg_;
    PowerOfTwoScale tensor_scale_;
    GroupPartition partition_;
    std::vector<KMeansPattern> group_patterns_;
};

TensorMeta calibrate(const TensorF16& tensor, const CalibrationConfig& cfg);

inline unsigned bit_width_for(uint32_t n) {
    unsigned w = 0;
    while ((1u << w) < n) ++w;
    return w;
}

} // namespace ecco
