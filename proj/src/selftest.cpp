#include "selftest.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>
#include <vector>

#include "calibration.hpp"
#include "codec4x.hpp"
#include "pardec.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace ecco {

namespace {

TensorF16 random_tensor(uint64_t rows, uint64_t cols, double scale, Rng& rng) {
    std::vector<uint16_t> bits(static_cast<size_t>(rows * cols));
    for (uint16_t& b : bits) {
        b = double_to_fp16(rng.gaussian() * scale);
    }
    return make_tensor(rows, cols, std::move(bits));
}

// Group values are clamped to the meta's representable range (|v| <= 448 2^e)
// so the FP8 group scale never overflows, then snapped to the fp16 grid.
std::array<double, kGroupSize4x> random_group(Rng& rng, double sigma, double max_abs) {
    max_abs = std::min(max_abs, 65504.0);
    std::array<double, kGroupSize4x> g{};
    for (double& v : g) {
        const double raw = std::clamp(rng.gaussian() * sigma, -max_abs, max_abs);
        v = fp16_to_double(double_to_fp16(raw));
    }
    return g;
}

void compare_block(const Block& block, const TensorMeta& meta, const char* what,
                   uint64_t& blocks) {
    const auto ref = decode_block_reference(block, meta);
    const auto par = parallel_decode(block, meta);
    for (size_t i = 0; i < kGroupSize4x; ++i) {
        if (ref[i] != par[i]) {
            raise(ErrorCode::internal,
                  std::string("parallel/reference mismatch (") + what + ") at element " +
                      std::to_string(i));
        }
    }
    ++blocks;
}

// Meta with a deliberately skewed codebook: 16 identical ladder patterns,
// one codebook whose high symbols cost 7-8 bits. Encoding a group that maps
// onto those symbols overflows the block and exercises the clip path; a
// near-constant group exercises maximum outlier padding.
TensorMeta crafted_meta() {
    TensorMeta meta;
    meta.mode = CompressionMode::weight;
    meta.pattern_index_coding = PatternIndexCoding::fixed;
    meta.tensor_scale = PowerOfTwoScale{0};
    meta.shared_patterns = 16;
    meta.codebooks_per_pattern = 1;
    KMeansPattern ladder;
    for (int i = 0; i < kPatternCentroids; ++i) {
        ladder.centroids[i] = -0.875 + 0.125 * i; // -0.875 .. 0.875
    }
    meta.library.patterns.assign(16, ladder);
    std::array<double, 16> freqs{};
    freqs.fill(0.0);
    freqs[7] = 1e6;  // centroid nearest zero: 2-bit code
    freqs[15] = 1e6; // scale symbol: 2-bit code
    meta.codebooks.assign(16, build_codebook(freqs));
    meta.finalize();
    return meta;
}

} // namespace

uint64_t run_equivalence_selftest(uint64_t seed, uint64_t min_blocks) {
    uint64_t blocks = 0;

    struct Combo {
        uint32_t patterns;
        uint32_t books;
        CompressionMode mode;
        PatternIndexCoding coding;
    };
    const Combo combos[] = {
        {16, 1, CompressionMode::weight, PatternIndexCoding::fixed},
        {16, 4, CompressionMode::kv, PatternIndexCoding::fixed},
        {64, 4, CompressionMode::weight, PatternIndexCoding::fixed},
        {64, 1, CompressionMode::weight, PatternIndexCoding::huffman},
        {16, 4, CompressionMode::kv, PatternIndexCoding::huffman},
    };

    std::vector<TensorMeta> metas;
    std::vector<PowerOfTwoScale> scales;
    Rng rng(derive_seed(seed, 0x5E1F));
    for (size_t c = 0; c < std::size(combos); ++c) {
        const Combo& combo = combos[c];
        const TensorF16 t = random_tensor(96, 128, 1.0 + 3.0 * rng.uniform(), rng);
        CalibrationConfig cfg;
        cfg.shared_patterns = combo.patterns;
        cfg.codebooks_per_pattern = combo.books;
        cfg.mode = combo.mode;
        cfg.pattern_index_coding = combo.coding;
        cfg.seed = derive_seed(seed, 0xCA11B, c);
        metas.push_back(calibrate(t, cfg));
        scales.push_back(metas.back().tensor_scale);

        // Every calibration-tensor group round-trips through both decoders.
        const GroupPartition part = partition_groups(t, kGroupSize4x);
        for (size_t g = 0; g < part.group_count; ++g) {
            const Block block = encode_block(load_group4x(t, g), metas.back());
            compare_block(block, metas.back(), "calibration tensor", blocks);
        }
    }

    // Crafted corner cases.
    const TensorMeta hard = crafted_meta();
    {
        std::array<double, kGroupSize4x> clip_group{};
        clip_group[0] = 448.0; // absmax, exactly on the FP8 grid
        for (size_t i = 1; i < kGroupSize4x; ++i) {
            // Alternate the outermost centroids: both carry 8-bit codes.
            clip_group[i] = (i % 2 ? -0.875 : 0.875) * 448.0;
        }
        EncodeStats stats;
        const Block block = encode_block(clip_group, hard, &stats);
        if (stats.clipped == 0 || stats.padded != 0) {
            raise(ErrorCode::internal, "selftest forced-clip block did not clip");
        }
        compare_block(block, hard, "forced clip", blocks);

        std::array<double, kGroupSize4x> pad_group{};
        pad_group[0] = 448.0;
        EncodeStats pad_stats;
        const Block pad_block = encode_block(pad_group, hard, &pad_stats);
        if (pad_stats.padded != 16 || pad_stats.clipped != 0) {
            raise(ErrorCode::internal, "selftest forced-pad block did not fill 16 slots");
        }
        compare_block(pad_block, hard, "forced max pad", blocks);
    }

    // Random groups cycled through every calibrated meta until the requested
    // block count is reached.
    size_t which = 0;
    while (blocks < min_blocks) {
        const size_t m = which % metas.size();
        ++which;
        const TensorMeta& meta = metas[m];
        const double max_abs = kFp8Max * scales[m].value();
        const double sigma = max_abs * (0.001 + 0.2 * rng.uniform());
        const Block block = encode_block(random_group(rng, sigma, max_abs), meta);
        compare_block(block, meta, "random group", blocks);
    }
    return blocks;
}

} // namespace ecco
