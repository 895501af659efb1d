#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bitstream.hpp"
#include "pardec.hpp"
#include "rng.hpp"
#include "selftest.hpp"

using namespace ecco;

namespace {

TensorMeta small_meta(uint32_t patterns, uint32_t books, uint64_t seed,
                      CompressionMode mode = CompressionMode::weight) {
    Rng rng(seed);
    std::vector<uint16_t> bits(static_cast<size_t>(std::max<uint32_t>(patterns, 32)) * 128);
    for (uint16_t& b : bits) b = double_to_fp16(rng.gaussian());
    const TensorF16 t = make_tensor(bits.size() / 128, 128, std::move(bits));
    CalibrationConfig cfg;
    cfg.shared_patterns = patterns;
    cfg.codebooks_per_pattern = books;
    cfg.mode = mode;
    cfg.seed = seed;
    return calibrate(t, cfg);
}

HuffmanCodebook codebook_with(const std::array<double, 16>& freqs) {
    return build_codebook(freqs);
}

// Sequential decode of a raw bit window with no boundary, the oracle for
// leaf and merge behavior.
std::vector<std::pair<uint8_t, unsigned>> sequential_decode(const uint8_t* data,
                                                            size_t capacity_bits,
                                                            size_t start,
                                                            size_t stop_before,
                                                            const HuffmanCodebook& cb) {
    std::vector<std::pair<uint8_t, unsigned>> out; // (symbol, end bit)
    size_t pos = start;
    while (pos < stop_before) {
        uint32_t acc = 0;
        unsigned len = 0;
        int sym = -1;
        while (len < 8 && sym < 0) {
            const uint32_t bit = read_bits_zero_extended(data, capacity_bits, pos + len, 1);
            acc = (acc << 1) | bit;
            ++len;
            for (int s = 0; s < 16; ++s) {
                if (cb.entries[s].length == len && cb.entries[s].bits == acc) {
                    sym = s;
                    break;
                }
            }
        }
        REQUIRE(sym >= 0);
        pos += len;
        out.emplace_back(static_cast<uint8_t>(sym), static_cast<unsigned>(pos));
    }
    return out;
}

} // namespace

TEST_CASE("leaf decode with a uniform codebook") {
    std::array<double, 16> freqs{};
    freqs.fill(1.0);
    const HuffmanCodebook cb = codebook_with(freqs);
    const LookaheadTable table = build_lookahead_table(cb);
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto window = static_cast<uint16_t>(rng.next_u64() & 0x7FFF);
        const LeafResult leaf = leaf_decode(window, table);
        // All lengths 4: offset 0 decodes exactly 2 symbols, eop 0.
        CHECK(leaf.offsets[0].count == 2);
        CHECK(leaf.offsets[0].eop == 0);
        CHECK(leaf.offsets[0].bits_used == 8);
    }
}

TEST_CASE("leaf decode of a zero window under a 2-bit '00' code") {
    // Strongly skewed frequencies put symbol 0 at the 2-bit code 00.
    std::array<double, 16> freqs{};
    freqs[0] = 1e9;
    const HuffmanCodebook cb = codebook_with(freqs);
    REQUIRE(cb.entries[0].length == 2);
    REQUIRE(cb.entries[0].bits == 0);
    const LookaheadTable table = build_lookahead_table(cb);
    const LeafResult leaf = leaf_decode(0, table);
    CHECK(leaf.offsets[0].count == 4); // 00 00 00 00
    CHECK(leaf.offsets[0].eop == 0);
    for (int k = 0; k < 4; ++k) CHECK(leaf.offsets[0].symbols[k] == 0);
}

TEST_CASE("leaf decode of an 8-bit code at offset 7") {
    // One rare symbol gets the longest code.
    std::array<double, 16> freqs{};
    for (int i = 0; i < 16; ++i) freqs[i] = std::pow(4.0, i);
    const HuffmanCodebook cb = codebook_with(freqs);
    int longest = 0;
    for (int i = 0; i < 16; ++i) {
        if (cb.entries[i].length > cb.entries[longest].length) longest = i;
    }
    REQUIRE(cb.entries[longest].length == 8);
    const LookaheadTable table = build_lookahead_table(cb);
    // Build a window whose bits 7..14 spell that code MSB-first.
    const uint32_t rev = reverse_bits(cb.entries[longest].bits, 8);
    const auto window = static_cast<uint16_t>(rev << 7);
    const LeafResult leaf = leaf_decode(window, table);
    CHECK(leaf.offsets[7].count == 1);
    CHECK(leaf.offsets[7].symbols[0] == longest);
    CHECK(leaf.offsets[7].eop == 7);
    CHECK(leaf.offsets[7].bits_used == 8);
}

TEST_CASE("leaf results always hold one to four symbols") {
    Rng rng(2);
    for (int trial = 0; trial < 40; ++trial) {
        std::array<double, 16> freqs{};
        for (double& f : freqs) f = rng.uniform(0.0, 100.0);
        const LookaheadTable table = build_lookahead_table(codebook_with(freqs));
        for (int w = 0; w < 200; ++w) {
            const auto window = static_cast<uint16_t>(rng.next_u64() & 0x7FFF);
            const LeafResult leaf = leaf_decode(window, table);
            for (unsigned o = 0; o < kLeafOffsets; ++o) {
                CHECK(leaf.offsets[o].count >= 1);
                CHECK(leaf.offsets[o].count <= 4);
                CHECK(leaf.offsets[o].eop < 8);
            }
        }
    }
}

TEST_CASE("merge selects the right continuation by end-of-parse") {
    // Definition check on hand-built nodes.
    MergeNode left, right;
    left.first_segment = 0;
    left.segment_count = 1;
    right.first_segment = 1;
    right.segment_count = 1;
    for (unsigned o = 0; o < kLeafOffsets; ++o) {
        left.entries[o].symbols = {static_cast<uint8_t>(o)};
        left.entries[o].ends = {static_cast<uint16_t>(o + 1)};
        left.entries[o].eop = static_cast<uint8_t>((o + 3) % 8);
        left.entries[o].bits = 8;
        right.entries[o].symbols = {static_cast<uint8_t>(10 + o % 6)};
        right.entries[o].ends = {static_cast<uint16_t>(8 + o + 1)};
        right.entries[o].eop = static_cast<uint8_t>(o);
        right.entries[o].bits = 4;
    }
    const MergeNode merged = merge_pair(left, right);
    CHECK(merged.segment_count == 2);
    // left eop(0) = 3: result(0) concatenates right's offset-3 list.
    CHECK(merged.entries[0].symbols.size() == 2);
    CHECK(merged.entries[0].symbols[1] == 13);
    CHECK(merged.entries[0].eop == 3);
    CHECK(merged.entries[0].bits == 12);

    MergeNode misaligned = right;
    misaligned.first_segment = 5;
    CHECK_THROWS_AS(merge_pair(left, misaligned), Error);
}

TEST_CASE("every node offset equals a sequential decode from the same bit") {
    const TensorMeta meta = small_meta(16, 4, 3);
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        std::array<double, kGroupSize4x> vals{};
        for (double& v : vals) v = fp16_to_double(double_to_fp16(rng.gaussian()));
        const Block block = encode_block(vals, meta);
        const TailFields tail = read_tail(block, meta);
        const HuffmanCodebook& cb = meta.codebook(tail.pattern, tail.codebook);

        DecodeTrace trace;
        trace.keep_full_nodes = true;
        parallel_decode(block, meta, &trace);
        REQUIRE(trace.full_stages.size() == kMergeStages);

        for (const auto& stage : trace.full_stages) {
            for (const MergeNode& node : stage) {
                const size_t node_end = (node.first_segment + node.segment_count) * 8;
                for (unsigned o = 0; o < kLeafOffsets; ++o) {
                    const size_t start = node.first_segment * 8 + o;
                    const auto oracle = sequential_decode(block.data(), kBlockBits, start,
                                                          node_end, cb);
                    const MergeEntry& e = node.entries[o];
                    REQUIRE(e.symbols.size() == oracle.size());
                    for (size_t k = 0; k < oracle.size(); ++k) {
                        CHECK(e.symbols[k] == oracle[k].first);
                        CHECK(e.ends[k] == oracle[k].second);
                    }
                    if (!oracle.empty()) {
                        CHECK(node.first_segment * 8 + node.segment_count * 8 + e.eop ==
                              oracle.back().second);
                    }
                }
            }
        }
    }
}

TEST_CASE("trace structure: 64 leaves and stages of 32 down to 1") {
    const TensorMeta meta = small_meta(16, 1, 5);
    std::array<double, kGroupSize4x> vals{};
    vals[3] = 0.25;
    const Block block = encode_block(vals, meta);
    DecodeTrace trace;
    parallel_decode(block, meta, &trace);
    CHECK(trace.leaves.size() == kLeafCount);
    REQUIRE(trace.stages.size() == kMergeStages);
    size_t expect = 32;
    for (const auto& stage : trace.stages) {
        CHECK(stage.size() == expect);
        expect /= 2;
    }
}

TEST_CASE("parallel equals reference over randomized blocks") {
    const TensorMeta metas[] = {
        small_meta(16, 1, 6),
        small_meta(16, 4, 7, CompressionMode::kv),
        small_meta(64, 4, 8),
    };
    Rng rng(9);
    for (int trial = 0; trial < 600; ++trial) {
        const TensorMeta& meta = metas[trial % 3];
        std::array<double, kGroupSize4x> vals{};
        const double sigma = rng.uniform(0.001, 2.0);
        for (double& v : vals) {
            v = fp16_to_double(double_to_fp16(
                std::clamp(rng.gaussian() * sigma, -440.0, 440.0)));
        }
        const Block block = encode_block(vals, meta);
        const auto ref = decode_block_reference(block, meta);
        uint32_t mask = 0;
        DecodeTrace trace;
        const auto par = parallel_decode(block, meta, &trace);
        mask = trace.outlier_mask;
        for (size_t i = 0; i < kGroupSize4x; ++i) {
            REQUIRE(ref[i] == par[i]);
        }
        EncodeStats stats;
        encode_block(vals, meta, &stats);
        if (stats.clipped == 0) CHECK(mask == stats.padded);
    }
}

TEST_CASE("mapper handles hypothetical all-scale symbol streams") {
    const TensorMeta meta = small_meta(4, 1, 10);
    std::vector<uint8_t> symbols(kGroupSize4x, kScaleSymbol);
    const uint8_t scale = fp8_quantize(2.0, Fp8Rounding::nearest_even);
    const auto out =
        map_values(symbols, meta.library.patterns[0], scale, PowerOfTwoScale{0}, {});
    for (uint16_t v : out) {
        CHECK(fp16_to_double(v) == 2.0);
    }
}

TEST_CASE("zero mask means no overrides, crafted outliers land at their positions") {
    const TensorMeta meta = small_meta(4, 1, 11);
    std::vector<uint8_t> symbols(kGroupSize4x, 0);
    std::vector<OutlierOverride> outliers = {
        {5, fp8_quantize(3.0, Fp8Rounding::nearest_even)},
        {9, fp8_quantize(-1.5, Fp8Rounding::nearest_even)},
        {5, fp8_quantize(7.0, Fp8Rounding::nearest_even)}, // last wins at position 5
    };
    const uint8_t scale = fp8_quantize(1.0, Fp8Rounding::nearest_even);
    const auto none =
        map_values(symbols, meta.library.patterns[0], scale, PowerOfTwoScale{0}, {});
    const auto three =
        map_values(symbols, meta.library.patterns[0], scale, PowerOfTwoScale{0}, outliers);
    int changed = 0;
    for (size_t i = 0; i < kGroupSize4x; ++i) {
        if (none[i] != three[i]) ++changed;
    }
    CHECK(changed == 2);
    CHECK(fp16_to_double(three[5]) == 7.0);
    CHECK(fp16_to_double(three[9]) == -1.5);
}

TEST_CASE("equivalence selftest covers clip and pad corners") {
    CHECK(run_equivalence_selftest(123, 800) >= 800);
}
