#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "error.hpp"

namespace ecco {

struct CodeEntry {
    uint16_t bits = 0;  // canonical code value, MSB-first when serialized to a stream
    uint8_t length = 0; // in bits
};

// Prefix code over the 16 group symbols. Lengths are confined to [2, 8] and
// the Kraft sum is exactly 1, so decoding from any bit offset always makes
// progress -- the parallel decoder depends on that.
struct HuffmanCodebook {
    static constexpr int kSymbols = 16;
    static constexpr int kMinLength = 2;
    static constexpr int kMaxLength = 8;

    std::array<CodeEntry, kSymbols> entries;
};

// Optimal length-limited code lengths via package-merge run on the
// [min_length, max_length] band directly (coin collector with face target
// n - 2^(max-min residual)); the returned lengths always satisfy
// sum 2^-len == 1. Weights must be positive.
std::vector<int> package_merge_lengths(const std::vector<double>& weights,
                                       int min_length, int max_length);

// Canonical code assignment: shorter codes numerically first; within a
// length, ascending symbol index.
std::vector<CodeEntry> assign_canonical_codes(const std::vector<int>& lengths);

// Builds a codebook for the 16 group symbols: Laplace(+1) smoothing so every
// symbol is encodable, optimal lengths in [2, 8], canonical assignment.
HuffmanCodebook build_codebook(const std::array<double, HuffmanCodebook::kSymbols>& frequencies);

// All lengths 4; used for patterns that received no calibration groups.
HuffmanCodebook uniform_codebook();

// Kraft sum scaled by 2^max_length (exact integer arithmetic).
uint64_t kraft_sum_scaled(const std::vector<int>& lengths, int max_length);

bool is_prefix_free(const std::vector<CodeEntry>& entries);

// Throws ErrorCode::format on any invariant violation.
void validate_codebook(const HuffmanCodebook& cb);

// General canonical code over n symbols (used for the variable-length
// pattern-index field). min length 1, max length 16; n == 1 yields the empty
// code (zero bits).
std::vector<CodeEntry> build_symbol_code(const std::vector<double>& frequencies);

inline uint32_t reverse_bits(uint32_t v, unsigned n) {
    uint32_t r = 0;
    for (unsigned i = 0; i < n; ++i) {
        r = (r << 1) | ((v >> i) & 1u);
    }
    return r;
}

// Byte-indexed decode table: index with the next 8 stream bits (stream order,
// bit i of the index = stream bit pos+i) and get the leading symbol and its
// code length in one step. Works because code lengths never exceed 8.
struct LookaheadTable {
    struct Entry {
        uint8_t symbol;
        uint8_t length;
    };
    std::array<Entry, 256> at;
};

LookaheadTable build_lookahead_table(const HuffmanCodebook& cb);

} // namespace ecco
