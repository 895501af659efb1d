#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bitstream.hpp"
#include "codec4x.hpp"
#include "rng.hpp"

using namespace ecco;

namespace {

TensorF16 gaussian_tensor(uint64_t rows, uint64_t cols, uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<uint16_t> bits(static_cast<size_t>(rows * cols));
    for (uint16_t& b : bits) b = double_to_fp16(rng.gaussian() * scale);
    return make_tensor(rows, cols, std::move(bits));
}

TensorMeta small_meta(uint32_t patterns, uint32_t books, uint64_t seed,
                      CompressionMode mode = CompressionMode::weight,
                      PatternIndexCoding coding = PatternIndexCoding::fixed) {
    const TensorF16 t = gaussian_tensor(std::max<uint64_t>(patterns, 32), 128, seed);
    CalibrationConfig cfg;
    cfg.shared_patterns = patterns;
    cfg.codebooks_per_pattern = books;
    cfg.mode = mode;
    cfg.pattern_index_coding = coding;
    cfg.seed = seed;
    return calibrate(t, cfg);
}

// 16 identical ladder patterns with one heavily skewed codebook, for
// deterministic clip/pad construction.
TensorMeta ladder_meta() {
    TensorMeta meta;
    meta.mode = CompressionMode::weight;
    meta.pattern_index_coding = PatternIndexCoding::fixed;
    meta.tensor_scale = PowerOfTwoScale{0};
    meta.shared_patterns = 16;
    meta.codebooks_per_pattern = 1;
    KMeansPattern ladder;
    for (int i = 0; i < kPatternCentroids; ++i) ladder.centroids[i] = -0.875 + 0.125 * i;
    meta.library.patterns.assign(16, ladder);
    std::array<double, 16> freqs{};
    freqs[7] = 1e6;
    freqs[15] = 1e6;
    meta.codebooks.assign(16, build_codebook(freqs));
    meta.finalize();
    return meta;
}

} // namespace

TEST_CASE("block layout for the default configuration") {
    const TensorMeta meta = small_meta(64, 4, 1);
    const BlockLayout l = layout_for(meta);
    CHECK(l.codebook_bits == 2);
    CHECK(l.codebook_offset == 502);
    CHECK(l.pattern_bits == 6);
    CHECK(l.fixed_tail_base == 496);
}

TEST_CASE("every emitted block is exactly 64 bytes with ratio 4") {
    const TensorMeta meta = small_meta(16, 4, 2);
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, kGroupSize4x> vals{};
        for (double& v : vals) {
            v = fp16_to_double(double_to_fp16(rng.gaussian()));
        }
        const Block block = encode_block(vals, meta);
        CHECK(block.size() == 64);
        CHECK(kGroupSize4x * 16 / (block.size() * 8) == 4); // 2048 / 512
    }
}

TEST_CASE("single-spike group round trips within FP8 tolerance") {
    const TensorMeta meta = small_meta(16, 4, 4);
    std::array<double, kGroupSize4x> vals{};
    vals[37] = 1.0;
    EncodeStats stats;
    const Block block = encode_block(vals, meta, &stats);
    CHECK(stats.histogram[kScaleSymbol] == 1);
    const auto recon = decode_block_reference(block, meta);
    // The spike comes back as the group scale: |descale| >= 1 within one FP8 step.
    const double spike = fp16_to_double(recon[37]);
    CHECK(spike >= 1.0);
    CHECK(spike <= 1.0 * (1.0 + 0.0625 * 2));
}

TEST_CASE("all-zero group reconstructs to all zeros") {
    const TensorMeta meta = small_meta(16, 1, 5);
    std::array<double, kGroupSize4x> vals{};
    const Block block = encode_block(vals, meta);
    const auto recon = decode_block_reference(block, meta);
    for (uint16_t v : recon) CHECK((v & 0x7FFF) == 0);
}

TEST_CASE("decode matches a per-element nearest-centroid oracle when unclipped") {
    const TensorMeta meta = small_meta(16, 4, 6);
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, kGroupSize4x> vals{};
        for (double& v : vals) v = fp16_to_double(double_to_fp16(rng.gaussian() * 0.5));
        EncodeStats stats;
        const Block block = encode_block(vals, meta, &stats);
        if (stats.clipped != 0) continue;
        const auto recon = decode_block_reference(block, meta);

        // Oracle: reconstruct directly from the normalization contract.
        const NormalizedGroup ng = normalize_group(vals, meta.tensor_scale);
        const KMeansPattern& pat = meta.library.patterns[stats.pattern];
        std::array<double, kGroupSize4x> expected{};
        for (size_t i = 0; i < kGroupSize4x; ++i) {
            if (static_cast<int>(i) == ng.absmax_index) {
                expected[i] = ng.descale;
            } else {
                double best = pat.centroids[0];
                for (double c : pat.centroids) {
                    if (std::fabs(ng.values[i] - c) < std::fabs(ng.values[i] - best)) best = c;
                }
                expected[i] = best * std::fabs(ng.descale);
            }
        }
        // Outlier overrides replace some positions with FP8 exact values.
        std::vector<bool> overridden(kGroupSize4x, false);
        const TailFields tail = read_tail(block, meta);
        BitReader r(block.data(), kBlockBits);
        for (unsigned j = 0; j < stats.padded; ++j) {
            const unsigned base = tail.tail_base - kOutlierSlotBits * (j + 1);
            const auto code = static_cast<uint8_t>(r.read_at(base, 8));
            const auto pos = static_cast<unsigned>(r.read_at(base + 8, 7));
            expected[pos] = fp8_dequantize_total(code) * meta.tensor_scale.value();
        }
        for (size_t i = 0; i < kGroupSize4x; ++i) {
            CHECK(fp16_to_double(recon[i]) ==
                  doctest::Approx(expected[i]).epsilon(1e-3));
        }
    }
}

TEST_CASE("forced clip: whole symbols dropped, no padding") {
    const TensorMeta meta = ladder_meta();
    std::array<double, kGroupSize4x> vals{};
    vals[0] = 448.0;
    for (size_t i = 1; i < kGroupSize4x; ++i) {
        vals[i] = (i % 2 ? -0.875 : 0.875) * 448.0; // outermost centroids: 8-bit codes
    }
    EncodeStats stats;
    const Block block = encode_block(vals, meta, &stats);
    CHECK(stats.clipped > 0);
    CHECK(stats.padded == 0);
    CHECK(stats.coded_bits <= layout_for(meta).fixed_tail_base);
    // Decoder agrees once the stream is truncated.
    const auto recon = decode_block_reference(block, meta);
    (void)recon;
}

TEST_CASE("near-constant group pads the full 16 outlier slots") {
    const TensorMeta meta = ladder_meta();
    std::array<double, kGroupSize4x> vals{};
    vals[0] = 448.0;
    EncodeStats stats;
    const Block block = encode_block(vals, meta, &stats);
    CHECK(stats.clipped == 0);
    CHECK(stats.padded == 16);

    // Every padded slot decodes to fp8(value) * tensor scale at its position.
    const auto recon = decode_block_reference(block, meta);
    CHECK(fp16_to_double(recon[0]) == 448.0);
}

TEST_CASE("single outlier overrides the huffman symbol") {
    const TensorMeta meta = ladder_meta();
    // Mostly centered data, one medium outlier at position 100.
    std::array<double, kGroupSize4x> vals{};
    vals[0] = 448.0;
    vals[100] = 100.0;
    EncodeStats stats;
    const Block block = encode_block(vals, meta, &stats);
    REQUIRE(stats.padded >= 1);
    const auto recon = decode_block_reference(block, meta);
    const double expected = fp8_dequantize(fp8_quantize(100.0, Fp8Rounding::nearest_even));
    CHECK(fp16_to_double(recon[100]) == expected);
}

TEST_CASE("codebook race picks the minimal coded length") {
    const TensorMeta meta = small_meta(16, 4, 8);
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, kGroupSize4x> vals{};
        for (double& v : vals) v = fp16_to_double(double_to_fp16(rng.gaussian()));
        EncodeStats stats;
        encode_block(vals, meta, &stats);

        const NormalizedGroup ng = normalize_group(vals, meta.tensor_scale);
        const auto symbols = map_symbols(ng.values, ng.absmax_index,
                                         meta.library.patterns[stats.pattern]);
        uint32_t best = UINT32_MAX;
        for (uint32_t h = 0; h < meta.codebooks_per_pattern; ++h) {
            uint32_t bits = 0;
            for (uint8_t s : symbols) bits += meta.codebook(stats.pattern, h).entries[s].length;
            best = std::min(best, bits);
        }
        uint32_t chosen = 0;
        for (uint8_t s : symbols) {
            chosen += meta.codebook(stats.pattern, stats.codebook).entries[s].length;
        }
        CHECK(chosen == best);
    }
}

TEST_CASE("clip/pad exclusivity and decoder mask agreement") {
    const TensorMeta meta = small_meta(16, 4, 10);
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::array<double, kGroupSize4x> vals{};
        const double sigma = rng.uniform(0.01, 2.0);
        for (double& v : vals) v = fp16_to_double(double_to_fp16(rng.gaussian() * sigma));
        EncodeStats stats;
        const Block block = encode_block(vals, meta, &stats);
        if (stats.clipped > 0) CHECK(stats.padded == 0);

        // The decoder recomputes the slot count from the stream end.
        const TailFields tail = read_tail(block, meta);
        CHECK(stats.padded == (tail.tail_base - stats.coded_bits) / kOutlierSlotBits);
        CHECK(stats.padded <= 16);
    }
}

TEST_CASE("re-encoding the decoded symbols reproduces the coded region bit for bit") {
    const TensorMeta meta = small_meta(16, 4, 12);
    Rng rng(13);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, kGroupSize4x> vals{};
        for (double& v : vals) v = fp16_to_double(double_to_fp16(rng.gaussian()));
        EncodeStats stats;
        const Block block = encode_block(vals, meta, &stats);
        if (stats.clipped != 0) continue;
        ++checked;

        // Decode the symbol stream, then re-encode with the logged codebook.
        const NormalizedGroup ng = normalize_group(vals, meta.tensor_scale);
        const auto symbols = map_symbols(ng.values, ng.absmax_index,
                                         meta.library.patterns[stats.pattern]);
        Block redone{};
        BitWriter w(redone.data(), kBlockBits);
        const HuffmanCodebook& cb = meta.codebook(stats.pattern, stats.codebook);
        for (uint8_t s : symbols) {
            w.write(reverse_bits(cb.entries[s].bits, cb.entries[s].length),
                    cb.entries[s].length);
        }
        BitReader a(block.data(), kBlockBits);
        BitReader b(redone.data(), kBlockBits);
        for (uint32_t bit = 0; bit < stats.coded_bits; ++bit) {
            CHECK(a.read_at(bit, 1) == b.read_at(bit, 1));
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("corrupt tail fields are rejected") {
    // H = 3 leaves an unused codebook id in the 2-bit field.
    const TensorMeta meta = small_meta(16, 3, 14);
    std::array<double, kGroupSize4x> vals{};
    vals[0] = 0.5;
    Block block = encode_block(vals, meta);
    // Overwrite the codebook id with 3 (>= H).
    BitWriter w(block.data(), kBlockBits);
    const BlockLayout l = layout_for(meta);
    w.write_at(l.codebook_offset, 3, l.codebook_bits);
    CHECK_THROWS_AS(decode_block_reference(block, meta), Error);

    // Pattern id out of range: S = 9 in a 4-bit field.
    const TensorMeta meta2 = small_meta(9, 1, 15);
    Block block2 = encode_block(vals, meta2);
    BitWriter w2(block2.data(), kBlockBits);
    const BlockLayout l2 = layout_for(meta2);
    w2.write_at(l2.fixed_tail_base, 15, l2.pattern_bits);
    CHECK_THROWS_AS(decode_block_reference(block2, meta2), Error);
}

TEST_CASE("huffman-coded pattern ids round trip") {
    const TensorMeta meta =
        small_meta(16, 2, 16, CompressionMode::weight, PatternIndexCoding::huffman);
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, kGroupSize4x> vals{};
        for (double& v : vals) v = fp16_to_double(double_to_fp16(rng.gaussian()));
        EncodeStats stats;
        const Block block = encode_block(vals, meta, &stats);
        const TailFields tail = read_tail(block, meta);
        CHECK(tail.pattern == stats.pattern);
        CHECK(tail.codebook == stats.codebook);
    }
}

TEST_CASE("roundtrip_mse is deterministic and excludes pads") {
    const TensorF16 t = gaussian_tensor(3, 100, 18); // 300 elements: pads in group 2
    CalibrationConfig cfg;
    cfg.shared_patterns = 2;
    cfg.codebooks_per_pattern = 2;
    const TensorMeta meta = calibrate(t, cfg);
    const RoundtripReport a = roundtrip_mse(t, meta);
    const RoundtripReport b = roundtrip_mse(t, meta);
    CHECK(a.mean_mse == b.mean_mse);
    CHECK(a.group_mse == b.group_mse);
    CHECK(a.group_mse.size() == 3);
}
