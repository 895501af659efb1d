#include "pardec.hpp"

#include <cmath>

#include "bitstream.hpp"
#include "fp16.hpp"

namespace ecco {

LeafResult leaf_decode(uint16_t window, const LookaheadTable& table) {
    LeafResult result;
    for (unsigned o = 0; o < kLeafOffsets; ++o) {
        LeafOffsetResult& r = result.offsets[o];
        unsigned pos = o;
        // Keep decoding while the next code starts inside this segment's
        // 8 bits of responsibility.
        while (pos < 8) {
            const uint32_t look = (window >> pos) & 0xFF; // 8 bits always available in the window
            const LookaheadTable::Entry e = table.at[look];
            r.symbols[r.count] = e.symbol;
            pos += e.length;
            r.rel_ends[r.count] = static_cast<uint8_t>(pos);
            r.count += 1;
        }
        r.eop = static_cast<uint8_t>(pos - 8);
        r.bits_used = static_cast<uint8_t>(pos - o);
    }
    return result;
}

MergeNode merge_pair(const MergeNode& left, const MergeNode& right) {
    if (left.segment_count != right.segment_count ||
        left.first_segment + left.segment_count != right.first_segment) {
        raise(ErrorCode::invalid_argument, "merge of misaligned segment ranges");
    }
    MergeNode node;
    node.first_segment = left.first_segment;
    node.segment_count = left.segment_count * 2;
    for (unsigned o = 0; o < kLeafOffsets; ++o) {
        const MergeEntry& l = left.entries[o];
        const MergeEntry& r = right.entries[l.eop];
        MergeEntry& out = node.entries[o];
        out.symbols.reserve(l.symbols.size() + r.symbols.size());
        out.symbols = l.symbols;
        out.symbols.insert(out.symbols.end(), r.symbols.begin(), r.symbols.end());
        out.ends = l.ends;
        out.ends.insert(out.ends.end(), r.ends.begin(), r.ends.end());
        out.eop = r.eop;
        out.bits = l.bits + r.bits;
    }
    return node;
}

std::array<uint16_t, kGroupSize4x> map_values(const std::vector<uint8_t>& symbols,
                                              const KMeansPattern& pattern,
                                              uint8_t scale_code,
                                              PowerOfTwoScale tensor_scale,
                                              const std::vector<OutlierOverride>& outliers) {
    const double descale = fp8_dequantize_total(scale_code) * tensor_scale.value();
    const double magnitude = std::fabs(descale);
    std::array<uint16_t, kGroupSize4x> out{};
    for (size_t i = 0; i < kGroupSize4x; ++i) {
        double v = 0.0;
        if (i < symbols.size()) {
            v = symbols[i] == kScaleSymbol ? descale
                                           : pattern.centroids[symbols[i]] * magnitude;
        }
        out[i] = double_to_fp16(v);
    }
    for (const OutlierOverride& ov : outliers) {
        const double v = fp8_dequantize_total(ov.fp8_value) * tensor_scale.value();
        out[ov.position] = double_to_fp16(v);
    }
    return out;
}

std::array<uint16_t, kGroupSize4x> parallel_decode(const Block& block,
                                                   const TensorMeta& meta,
                                                   DecodeTrace* trace) {
    const TailFields tail = read_tail(block, meta);
    const LookaheadTable& table = meta.lookahead_for(tail.pattern, tail.codebook);

    // Stage 0: 64 leaf decoders over overlapping 15-bit windows; the last
    // window hangs past bit 511 and reads zeros there. Tail bits decode as
    // speculative garbage and are discarded by the final selection.
    std::vector<MergeNode> nodes(kLeafCount);
    if (trace) {
        trace->leaves.clear();
        trace->stages.clear();
        trace->full_stages.clear();
    }
    for (unsigned seg = 0; seg < kLeafCount; ++seg) {
        const uint16_t window = static_cast<uint16_t>(
            read_bits_zero_extended(block.data(), kBlockBits, seg * 8, kLeafWindowBits));
        const LeafResult leaf = leaf_decode(window, table);
        if (trace) trace->leaves.push_back(leaf);
        MergeNode& node = nodes[seg];
        node.first_segment = seg;
        node.segment_count = 1;
        for (unsigned o = 0; o < kLeafOffsets; ++o) {
            const LeafOffsetResult& r = leaf.offsets[o];
            MergeEntry& e = node.entries[o];
            e.symbols.assign(r.symbols.begin(), r.symbols.begin() + r.count);
            e.ends.resize(r.count);
            for (unsigned k = 0; k < r.count; ++k) {
                e.ends[k] = static_cast<uint16_t>(seg * 8 + r.rel_ends[k]);
            }
            e.eop = r.eop;
            e.bits = r.bits_used;
        }
    }

    for (unsigned stage = 0; stage < kMergeStages; ++stage) {
        std::vector<MergeNode> next(nodes.size() / 2);
        for (size_t i = 0; i < next.size(); ++i) {
            next[i] = merge_pair(nodes[2 * i], nodes[2 * i + 1]);
        }
        nodes = std::move(next);
        if (trace) {
            std::vector<NodeSummary> summaries;
            summaries.reserve(nodes.size());
            for (const MergeNode& n : nodes) {
                NodeSummary s;
                s.first_segment = n.first_segment;
                s.segment_count = n.segment_count;
                for (unsigned o = 0; o < kLeafOffsets; ++o) {
                    s.symbol_count[o] = static_cast<uint8_t>(
                        std::min<size_t>(n.entries[o].symbols.size(), 255));
                    s.eop[o] = n.entries[o].eop;
                }
                summaries.push_back(s);
            }
            trace->stages.push_back(std::move(summaries));
            if (trace->keep_full_nodes) trace->full_stages.push_back(nodes);
        }
    }

    // Final selection: offset 0 of the root covers a sequential parse from
    // bit 0; keep at most 128 symbols, none ending past the tail base.
    const MergeEntry& root = nodes[0].entries[0];
    std::vector<uint8_t> symbols;
    unsigned end = 0;
    for (size_t k = 0; k < root.symbols.size() && symbols.size() < kGroupSize4x; ++k) {
        if (root.ends[k] > tail.tail_base) break;
        symbols.push_back(root.symbols[k]);
        end = root.ends[k];
    }

    const uint32_t mask = (tail.tail_base - end) / kOutlierSlotBits;
    BitReader reader(block.data(), kBlockBits);
    std::vector<OutlierOverride> outliers;
    outliers.reserve(mask);
    for (uint32_t j = 0; j < mask; ++j) {
        const unsigned base = tail.tail_base - kOutlierSlotBits * (j + 1);
        OutlierOverride ov;
        ov.fp8_value = static_cast<uint8_t>(reader.read_at(base, 8));
        ov.position = static_cast<uint8_t>(reader.read_at(base + 8, 7));
        outliers.push_back(ov);
    }
    if (trace) {
        trace->outlier_mask = mask;
        trace->selected_symbols = static_cast<uint32_t>(symbols.size());
    }

    return map_values(symbols, meta.library.patterns[tail.pattern], tail.scale_code,
                      meta.tensor_scale, outliers);
}

} // namespace ecco
