#include "huffman.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecco {

namespace {

struct Item {
    double weight;
    std::vector<uint16_t> coins; // symbol index per contained coin
};

} // namespace

std::vector<int> package_merge_lengths(const std::vector<double>& weights,
                                       int min_length, int max_length) {
    const size_t n = weights.size();
    if (n < 2) {
        raise(ErrorCode::invalid_argument, "package-merge needs at least two symbols");
    }
    if (min_length < 1 || max_length < min_length || max_length > 31) {
        raise(ErrorCode::invalid_argument, "bad length limits");
    }
    if ((static_cast<uint64_t>(1) << max_length) < n) {
        raise(ErrorCode::invalid_argument, "max length cannot host all symbols");
    }
    if (n < (static_cast<uint64_t>(1) << min_length) && max_length != min_length) {
        // With fewer symbols than 2^min the Kraft sum cannot reach 1 at the
        // minimum length; callers never hit this with the fixed 16-symbol
        // alphabet but the band must be sane.
        raise(ErrorCode::invalid_argument, "min length too large for symbol count");
    }
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            raise(ErrorCode::invalid_argument, "weights must be positive and finite");
        }
    }

    // Band reduction: l_i = min_length + d_i with d_i in [0, D] and
    // sum 2^-d_i = 2^min_length. Coin collector over per-symbol coins at
    // depths 1..D; selecting a face total of n - 2^min_length makes the
    // selected coin count per symbol equal d_i.
    const int depth = max_length - min_length;
    const uint64_t target = n - (static_cast<uint64_t>(1) << min_length);
    std::vector<int> lengths(n, min_length);
    if (depth == 0 || target == 0) {
        if (kraft_sum_scaled(lengths, max_length) !=
            (static_cast<uint64_t>(1) << max_length)) {
            raise(ErrorCode::invalid_argument, "degenerate length band is infeasible");
        }
        return lengths;
    }

    auto fresh_coins = [&] {
        std::vector<Item> coins(n);
        for (size_t i = 0; i < n; ++i) {
            coins[i].weight = weights[i];
            coins[i].coins = {static_cast<uint16_t>(i)};
        }
        return coins;
    };

    std::vector<Item> current = fresh_coins();
    std::stable_sort(current.begin(), current.end(),
                     [](const Item& a, const Item& b) { return a.weight < b.weight; });
    for (int level = depth; level >= 2; --level) {
        std::vector<Item> next = fresh_coins();
        for (size_t a = 0; a + 1 < current.size(); a += 2) {
            Item pkg;
            pkg.weight = current[a].weight + current[a + 1].weight;
            pkg.coins = current[a].coins;
            pkg.coins.insert(pkg.coins.end(), current[a + 1].coins.begin(),
                             current[a + 1].coins.end());
            next.push_back(std::move(pkg));
        }
        std::stable_sort(next.begin(), next.end(),
                         [](const Item& a, const Item& b) { return a.weight < b.weight; });
        current = std::move(next);
    }

    const uint64_t take = 2 * target;
    if (take > current.size()) {
        raise(ErrorCode::internal, "package-merge ran out of items");
    }
    for (uint64_t t = 0; t < take; ++t) {
        for (uint16_t sym : current[t].coins) {
            lengths[sym] += 1;
        }
    }

    // The construction guarantees these; keep them as hard checks.
    for (int l : lengths) {
        if (l < min_length || l > max_length) {
            raise(ErrorCode::internal, "package-merge produced out-of-band length");
        }
    }
    if (kraft_sum_scaled(lengths, max_length) !=
        (static_cast<uint64_t>(1) << max_length)) {
        raise(ErrorCode::internal, "package-merge produced incomplete code");
    }
    return lengths;
}

std::vector<CodeEntry> assign_canonical_codes(const std::vector<int>& lengths) {
    const size_t n = lengths.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (lengths[a] != lengths[b]) return lengths[a] < lengths[b];
        return a < b;
    });

    std::vector<CodeEntry> entries(n);
    uint32_t code = 0;
    int prev_len = 0;
    for (size_t k = 0; k < n; ++k) {
        const size_t sym = order[k];
        const int len = lengths[sym];
        if (len == 0) {
            raise(ErrorCode::invalid_argument, "zero code length");
        }
        if (prev_len == 0) {
            code = 0;
        } else {
            code = (code + 1) << (len - prev_len);
        }
        prev_len = len;
        if (code >= (1u << len)) {
            raise(ErrorCode::invalid_argument, "lengths violate the Kraft inequality");
        }
        entries[sym] = CodeEntry{static_cast<uint16_t>(code), static_cast<uint8_t>(len)};
    }
    return entries;
}

HuffmanCodebook build_codebook(const std::array<double, HuffmanCodebook::kSymbols>& frequencies) {
    std::vector<double> weights(frequencies.size());
    for (size_t i = 0; i < frequencies.size(); ++i) {
        if (!(frequencies[i] >= 0.0) || !std::isfinite(frequencies[i])) {
            raise(ErrorCode::invalid_argument, "negative frequency");
        }
        weights[i] = frequencies[i] + 1.0; // Laplace smoothing: every symbol gets a code
    }
    const std::vector<int> lengths = package_merge_lengths(
        weights, HuffmanCodebook::kMinLength, HuffmanCodebook::kMaxLength);
    const std::vector<CodeEntry> entries = assign_canonical_codes(lengths);
    HuffmanCodebook cb;
    std::copy(entries.begin(), entries.end(), cb.entries.begin());
    validate_codebook(cb);
    return cb;
}

HuffmanCodebook uniform_codebook() {
    std::array<double, HuffmanCodebook::kSymbols> freqs{};
    freqs.fill(1.0);
    return build_codebook(freqs);
}

uint64_t kraft_sum_scaled(const std::vector<int>& lengths, int max_length) {
    uint64_t sum = 0;
    for (int l : lengths) {
        if (l < 1 || l > max_length) {
            raise(ErrorCode::invalid_argument, "length outside band");
        }
        sum += static_cast<uint64_t>(1) << (max_length - l);
    }
    return sum;
}

bool is_prefix_free(const std::vector<CodeEntry>& entries) {
    for (size_t i = 0; i < entries.size(); ++i) {
        for (size_t j = 0; j < entries.size(); ++j) {
            if (i == j) continue;
            const CodeEntry& a = entries[i];
            const CodeEntry& b = entries[j];
            if (a.length == 0 || b.length == 0) return false;
            if (a.length <= b.length &&
                static_cast<uint32_t>(b.bits >> (b.length - a.length)) == a.bits) {
                return false;
            }
        }
    }
    return true;
}

void validate_codebook(const HuffmanCodebook& cb) {
    std::vector<int> lengths;
    std::vector<CodeEntry> entries;
    for (const CodeEntry& e : cb.entries) {
        if (e.length < HuffmanCodebook::kMinLength || e.length > HuffmanCodebook::kMaxLength) {
            raise(ErrorCode::format, "codebook length outside [2, 8]");
        }
        if (e.bits >= (1u << e.length)) {
            raise(ErrorCode::format, "codebook code wider than its length");
        }
        lengths.push_back(e.length);
        entries.push_back(e);
    }
    if (kraft_sum_scaled(lengths, HuffmanCodebook::kMaxLength) !=
        (static_cast<uint64_t>(1) << HuffmanCodebook::kMaxLength)) {
        raise(ErrorCode::format, "codebook Kraft sum is not 1");
    }
    if (!is_prefix_free(entries)) {
        raise(ErrorCode::format, "codebook is not prefix-free");
    }
    const std::vector<CodeEntry> canonical = assign_canonical_codes(lengths);
    for (size_t i = 0; i < entries.size(); ++i) {
        if (canonical[i].bits != entries[i].bits) {
            raise(ErrorCode::format, "codebook codes are not canonical");
        }
    }
}

std::vector<CodeEntry> build_symbol_code(const std::vector<double>& frequencies) {
    const size_t n = frequencies.size();
    if (n == 0) {
        raise(ErrorCode::invalid_argument, "empty alphabet");
    }
    if (n == 1) {
        return {CodeEntry{0, 0}};
    }
    std::vector<double> weights(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(frequencies[i] >= 0.0) || !std::isfinite(frequencies[i])) {
            raise(ErrorCode::invalid_argument, "negative frequency");
        }
        weights[i] = frequencies[i] + 1.0;
    }
    const std::vector<int> lengths = package_merge_lengths(weights, 1, 16);
    return assign_canonical_codes(lengths);
}

LookaheadTable build_lookahead_table(const HuffmanCodebook& cb) {
    LookaheadTable table;
    std::array<bool, 256> covered{};
    for (int sym = 0; sym < HuffmanCodebook::kSymbols; ++sym) {
        const CodeEntry& e = cb.entries[sym];
        const uint32_t rev = reverse_bits(e.bits, e.length);
        const uint32_t fills = 1u << (8 - e.length);
        for (uint32_t f = 0; f < fills; ++f) {
            const uint32_t idx = rev | (f << e.length);
            if (covered[idx]) {
                raise(ErrorCode::format, "codebook is not prefix-free");
            }
            covered[idx] = true;
            table.at[idx] = LookaheadTable::Entry{static_cast<uint8_t>(sym), e.length};
        }
    }
    for (bool c : covered) {
        if (!c) {
            raise(ErrorCode::format, "codebook does not cover all bit strings");
        }
    }
    return table;
}

} // namespace ecco
