#include "codec4x.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bitstream.hpp"
#include "parallel.hpp"
#include "pardec.hpp"

namespace ecco {

BlockLayout layout_for(const TensorMeta& meta) {
    BlockLayout l;
    l.codebook_bits = bit_width_for(meta.codebooks_per_pattern);
    l.codebook_offset = kScaleFieldOffset - l.codebook_bits;
    if (meta.pattern_index_coding == PatternIndexCoding::fixed) {
        l.pattern_bits = bit_width_for(meta.shared_patterns);
        l.fixed_tail_base = l.codebook_offset - l.pattern_bits;
    } else {
        l.pattern_bits = 0;
        l.fixed_tail_base = 0; // tail base varies per block
    }
    return l;
}

TailFields read_tail(const Block& block, const TensorMeta& meta) {
    const BlockLayout layout = layout_for(meta);
    BitReader reader(block.data(), kBlockBits);
    TailFields t;
    t.scale_code = static_cast<uint8_t>(reader.read_at(kScaleFieldOffset, 8));
    t.codebook = layout.codebook_bits
                     ? static_cast<uint32_t>(reader.read_at(layout.codebook_offset, layout.codebook_bits))
                     : 0;
    if (t.codebook >= meta.codebooks_per_pattern) {
        raise(ErrorCode::format, "corrupt block: codebook id out of range");
    }
    if (meta.pattern_index_coding == PatternIndexCoding::fixed) {
        t.pattern = layout.pattern_bits
                        ? static_cast<uint32_t>(
                              reader.read_at(layout.fixed_tail_base, layout.pattern_bits))
                        : 0;
        if (t.pattern >= meta.shared_patterns) {
            raise(ErrorCode::format, "corrupt block: pattern id out of range");
        }
        t.tail_base = layout.fixed_tail_base;
        return t;
    }

    // Variable-width pattern id: canonical code stored bit-reversed, read
    // downward from just below the codebook field.
    if (meta.shared_patterns == 1) {
        t.pattern = 0;
        t.tail_base = layout.codebook_offset;
        return t;
    }
    uint32_t acc = 0;
    unsigned len = 0;
    int found = -1;
    while (len < 16) {
        if (layout.codebook_offset < len + 1) break;
        const size_t bit_pos = layout.codebook_offset - 1 - len;
        acc = (acc << 1) | static_cast<uint32_t>(reader.read_at(bit_pos, 1));
        ++len;
        for (uint32_t p = 0; p < meta.shared_patterns; ++p) {
            const CodeEntry& e = meta.pattern_index_code[p];
            if (e.length == len && e.bits == acc) {
                found = static_cast<int>(p);
                break;
            }
        }
        if (found >= 0) break;
    }
    if (found < 0) {
        raise(ErrorCode::format, "corrupt block: unparsable pattern id");
    }
    t.pattern = static_cast<uint32_t>(found);
    t.tail_base = layout.codebook_offset - len;
    return t;
}

namespace {

struct OutlierCandidate {
    uint8_t position;
    uint8_t fp8_value;
};

// Non-absmax elements ordered from the second largest absolute value down,
// capped at the 16 the encoder tracks. FP8 quantization uses the per-tensor
// scale, same as the group scale factor.
std::vector<OutlierCandidate> outlier_candidates(
    const std::array<double, kGroupSize4x>& values, int absmax_index,
    PowerOfTwoScale tensor_scale) {
    std::array<uint8_t, kGroupSize4x> order{};
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](uint8_t a, uint8_t b) {
        const double fa = std::fabs(values[a]);
        const double fb = std::fabs(values[b]);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    std::vector<OutlierCandidate> out;
    out.reserve(16);
    for (uint8_t idx : order) {
        if (idx == absmax_index) continue;
        out.push_back(OutlierCandidate{
            idx, fp8_quantize(values[idx] / tensor_scale.value(), Fp8Rounding::nearest_even)});
        if (out.size() == 16) break;
    }
    return out;
}

} // namespace

Block encode_block(const std::array<double, kGroupSize4x>& values,
                   const TensorMeta& meta, EncodeStats* stats) {
    const BlockLayout layout = layout_for(meta);
    const NormalizedGroup ng = normalize_group(values, meta.tensor_scale);

    uint32_t pattern;
    if (meta.mode == CompressionMode::kv) {
        pattern = select_pattern_minmax(ng.values, ng.absmax_index, meta.library);
    } else {
        pattern = assign_pattern_mse(ng.values, ng.absmax_index, meta.library).pattern;
    }
    const std::array<uint8_t, kGroupSize4x> symbols =
        map_symbols(ng.values, ng.absmax_index, meta.library.patterns[pattern]);

    // Codebook race: every candidate encodes the same symbols, the shortest
    // total stream wins (ties to the lower index).
    uint32_t book = 0;
    uint32_t best_bits = UINT32_MAX;
    for (uint32_t h = 0; h < meta.codebooks_per_pattern; ++h) {
        const HuffmanCodebook& cb = meta.codebook(pattern, h);
        uint32_t bits = 0;
        for (uint8_t s : symbols) bits += cb.entries[s].length;
        if (bits < best_bits) {
            best_bits = bits;
            book = h;
        }
    }
    const HuffmanCodebook& cb = meta.codebook(pattern, book);

    unsigned tail_base;
    if (meta.pattern_index_coding == PatternIndexCoding::fixed) {
        tail_base = layout.fixed_tail_base;
    } else {
        tail_base = layout.codebook_offset - meta.pattern_index_code[pattern].length;
    }

    // Clip whole trailing symbols until the stream fits.
    size_t kept = symbols.size();
    uint32_t coded = best_bits;
    while (coded > tail_base) {
        --kept;
        coded -= cb.entries[symbols[kept]].length;
    }

    Block block{};
    BitWriter writer(block.data(), kBlockBits);
    for (size_t i = 0; i < kept; ++i) {
        const CodeEntry& e = cb.entries[symbols[i]];
        writer.write(reverse_bits(e.bits, e.length), e.length); // MSB first in the stream
    }

    const unsigned slack = tail_base - coded;
    const unsigned slots = slack / kOutlierSlotBits;
    if (slots > 0) {
        const std::vector<OutlierCandidate> cands =
            outlier_candidates(values, ng.absmax_index, meta.tensor_scale);
        for (unsigned j = 0; j < slots; ++j) {
            // If geometry offers more slots than tracked candidates, repeat
            // the last one; overrides are idempotent.
            const OutlierCandidate& c =
                cands[std::min<size_t>(j, cands.size() - 1)];
            const unsigned base = tail_base - kOutlierSlotBits * (j + 1);
            writer.write_at(base, c.fp8_value, 8);
            writer.write_at(base + 8, c.position, 7);
        }
    }

    writer.write_at(kScaleFieldOffset, ng.scale_code, 8);
    if (layout.codebook_bits) {
        writer.write_at(layout.codebook_offset, book, layout.codebook_bits);
    }
    if (meta.pattern_index_coding == PatternIndexCoding::fixed) {
        if (layout.pattern_bits) {
            writer.write_at(layout.fixed_tail_base, pattern, layout.pattern_bits);
        }
    } else {
        const CodeEntry& e = meta.pattern_index_code[pattern];
        for (unsigned j = 0; j < e.length; ++j) {
            const uint64_t bit = (e.bits >> (e.length - 1 - j)) & 1u;
            writer.write_at(layout.codebook_offset - 1 - j, bit, 1);
        }
    }

    if (stats) {
        stats->pattern = pattern;
        stats->codebook = book;
        stats->coded_bits = coded;
        stats->clipped = static_cast<uint32_t>(symbols.size() - kept);
        stats->padded = slots;
        stats->histogram.fill(0);
        for (uint8_t s : symbols) stats->histogram[s] += 1;
    }
    return block;
}

std::array<uint16_t, kGroupSize4x> decode_block_reference(const Block& block,
                                                          const TensorMeta& meta) {
    const TailFields tail = read_tail(block, meta);
    const HuffmanCodebook& cb = meta.codebook(tail.pattern, tail.codebook);
    const KMeansPattern& pattern = meta.library.patterns[tail.pattern];
    BitReader reader(block.data(), kBlockBits);

    // Bit-serial canonical decode from bit 0. Stops at 128 symbols or as soon
    // as no complete code can finish inside [0, tail_base).
    std::vector<uint8_t> symbols;
    symbols.reserve(kGroupSize4x);
    size_t pos = 0;
    while (symbols.size() < kGroupSize4x) {
        uint32_t acc = 0;
        unsigned len = 0;
        int sym = -1;
        while (len < HuffmanCodebook::kMaxLength) {
            if (pos + len >= tail.tail_base) break;
            acc = (acc << 1) | static_cast<uint32_t>(reader.read_at(pos + len, 1));
            ++len;
            for (int s = 0; s < HuffmanCodebook::kSymbols; ++s) {
                if (cb.entries[s].length == len && cb.entries[s].bits == acc) {
                    sym = s;
                    break;
                }
            }
            if (sym >= 0) break;
        }
        if (sym < 0) break;
        symbols.push_back(static_cast<uint8_t>(sym));
        pos += len;
    }

    const double descale =
        fp8_dequantize_total(tail.scale_code) * meta.tensor_scale.value();
    const double magnitude = std::fabs(descale);

    std::array<uint16_t, kGroupSize4x> out{};
    for (size_t i = 0; i < kGroupSize4x; ++i) {
        double v = 0.0; // clipped positions reconstruct as zero
        if (i < symbols.size()) {
            v = symbols[i] == kScaleSymbol
                    ? descale
                    : pattern.centroids[symbols[i]] * magnitude;
        }
        out[i] = double_to_fp16(v);
    }

    const unsigned outliers = (tail.tail_base - static_cast<unsigned>(pos)) / kOutlierSlotBits;
    for (unsigned j = 0; j < outliers; ++j) {
        const unsigned base = tail.tail_base - kOutlierSlotBits * (j + 1);
        const uint8_t code = static_cast<uint8_t>(reader.read_at(base, 8));
        const unsigned position = static_cast<unsigned>(reader.read_at(base + 8, 7));
        const double v = fp8_dequantize_total(code) * meta.tensor_scale.value();
        out[position] = double_to_fp16(v); // later slots overwrite earlier ones
    }
    return out;
}

RoundtripReport roundtrip_mse(const TensorF16& tensor, const TensorMeta& meta,
                              DecoderKind decoder) {
    const GroupPartition part = partition_groups(tensor, kGroupSize4x);
    RoundtripReport rep;
    rep.group_mse.resize(part.group_count);
    rep.stats.resize(part.group_count);
    std::vector<double> sse(part.group_count);
    const uint64_t total = tensor.element_count();

    parallel_for_index(part.group_count, [&](size_t g) {
        const std::array<double, kGroupSize4x> vals = load_group4x(tensor, g);
        const Block block = encode_block(vals, meta, &rep.stats[g]);
        const std::array<uint16_t, kGroupSize4x> recon =
            decoder == DecoderKind::parallel ? parallel_decode(block, meta)
                                             : decode_block_reference(block, meta);
        const size_t real = static_cast<size_t>(
            std::min<uint64_t>(kGroupSize4x, total - g * kGroupSize4x));
        double s = 0.0;
        for (size_t i = 0; i < real; ++i) {
            const double d = fp16_to_double(recon[i]) - vals[i];
            s += d * d;
        }
        sse[g] = s;
        rep.group_mse[g] = real ? s / static_cast<double>(real) : 0.0;
    });

    double total_sse = 0.0;
    for (double s : sse) total_sse += s;
    rep.mean_mse = total ? total_sse / static_cast<double>(total) : 0.0;
    return rep;
}

} // namespace ecco
