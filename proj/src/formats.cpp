#include "formats.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "codec2x.hpp"
#include "parallel.hpp"

#include <json.hpp>

namespace ecco {

namespace {

class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        buf_.push_back(static_cast<uint8_t>(v));
        buf_.push_back(static_cast<uint8_t>(v >> 8));
    }
    void i16(int16_t v) { u16(static_cast<uint16_t>(v)); }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void bytes(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }

    const std::vector<uint8_t>& buffer() const { return buf_; }

private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(std::vector<uint8_t> data, std::string name)
        : data_(std::move(data)), name_(std::move(name)) {}

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint16_t u16() {
        need(2);
        const uint16_t v = static_cast<uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    int16_t i16() { return static_cast<int16_t>(u16()); }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    void bytes(uint8_t* out, size_t n) {
        need(n);
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }
    size_t position() const { return pos_; }
    size_t remaining() const { return data_.size() - pos_; }

    void expect_end() const {
        if (pos_ != data_.size()) {
            raise(ErrorCode::format,
                  name_ + ": trailing garbage at byte offset " + std::to_string(pos_));
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        raise(ErrorCode::format, name_ + ": " + what + " at byte offset " + std::to_string(pos_));
    }

private:
    void need(size_t n) const {
        if (pos_ + n > data_.size()) {
            raise(ErrorCode::format, name_ + ": truncated file, needed " + std::to_string(n) +
                                         " bytes at offset " + std::to_string(pos_));
        }
    }

    std::vector<uint8_t> data_;
    std::string name_;
    size_t pos_ = 0;
};

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(ErrorCode::io, "cannot open " + path);
    }
    in.seekg(0, std::ios::end);
    const auto size = static_cast<size_t>(in.tellg());
    in.seekg(0);
    std::vector<uint8_t> data(size);
    if (size > 0) {
        in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
    }
    if (!in) {
        raise(ErrorCode::io, "cannot read " + path);
    }
    return data;
}

void write_file(const std::string& path, const std::vector<uint8_t>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(ErrorCode::io, "cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) {
        raise(ErrorCode::io, "cannot write " + path);
    }
}

void check_magic(ByteReader& r, const char (&magic)[5]) {
    uint8_t m[4];
    r.bytes(m, 4);
    if (std::memcmp(m, magic, 4) != 0) {
        raise(ErrorCode::format, std::string("bad magic, expected ") + magic);
    }
}

} // namespace

void save_tensor(const TensorF16& t, const std::string& path) {
    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>("ECCT"), 4);
    w.u16(kFormatVersion);
    w.u8(1); // dtype fp16
    w.u8(2);
    w.u64(t.rows);
    w.u64(t.cols);
    for (uint16_t v : t.values) w.u16(v);
    write_file(path, w.buffer());
}

TensorF16 load_tensor(const std::string& path) {
    ByteReader r(read_file(path), path);
    check_magic(r, "ECCT");
    if (r.u16() != kFormatVersion) r.fail("unsupported version");
    if (r.u8() != 1) r.fail("unsupported dtype");
    const uint8_t ndim = r.u8();
    if (ndim < 1 || ndim > 2) r.fail("unsupported rank");
    uint64_t rows = 1;
    uint64_t cols = r.u64();
    if (ndim == 2) {
        rows = cols;
        cols = r.u64();
    }
    if (rows == 0 || cols == 0) r.fail("zero dimension");
    const uint64_t n = rows * cols;
    if (r.remaining() != n * 2) {
        r.fail("payload size mismatch, expected " + std::to_string(n * 2) + " bytes, have " +
               std::to_string(r.remaining()));
    }
    std::vector<uint16_t> values(static_cast<size_t>(n));
    for (uint64_t i = 0; i < n; ++i) {
        const uint16_t bits = r.u16();
        if (!fp16_is_finite(bits)) {
            r.fail("non-finite fp16 value at element " + std::to_string(i));
        }
        values[static_cast<size_t>(i)] = bits;
    }
    r.expect_end();
    return TensorF16{rows, cols, std::move(values)};
}

std::vector<uint8_t> serialize_meta(const TensorMeta& meta) {
    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>("ECCM"), 4);
    w.u16(kFormatVersion);
    w.u8(static_cast<uint8_t>(meta.mode));
    w.u8(static_cast<uint8_t>(meta.pattern_index_coding));
    w.i16(static_cast<int16_t>(meta.tensor_scale.exponent));
    w.u16(static_cast<uint16_t>(meta.shared_patterns));
    w.u16(static_cast<uint16_t>(meta.codebooks_per_pattern));
    for (const KMeansPattern& p : meta.library.patterns) {
        for (double c : p.centroids) w.f32(static_cast<float>(c));
    }
    for (const HuffmanCodebook& cb : meta.codebooks) {
        for (const CodeEntry& e : cb.entries) {
            w.u8(e.length);
            w.u16(e.bits);
        }
    }
    if (meta.pattern_index_coding == PatternIndexCoding::huffman) {
        for (const CodeEntry& e : meta.pattern_index_code) {
            w.u8(e.length);
            w.u16(e.bits);
        }
    }
    return w.buffer();
}

void save_meta(const TensorMeta& meta, const std::string& path) {
    write_file(path, serialize_meta(meta));
}

TensorMeta load_meta(const std::string& path) {
    ByteReader r(read_file(path), path);
    check_magic(r, "ECCM");
    if (r.u16() != kFormatVersion) r.fail("unsupported version");
    TensorMeta meta;
    const uint8_t mode = r.u8();
    if (mode > 1) r.fail("bad mode");
    meta.mode = static_cast<CompressionMode>(mode);
    const uint8_t coding = r.u8();
    if (coding > 1) r.fail("bad pattern index coding");
    meta.pattern_index_coding = static_cast<PatternIndexCoding>(coding);
    meta.tensor_scale.exponent = r.i16();
    meta.shared_patterns = r.u16();
    meta.codebooks_per_pattern = r.u16();
    if (meta.shared_patterns == 0 || meta.codebooks_per_pattern == 0) {
        r.fail("pattern or codebook count is zero");
    }
    meta.library.patterns.resize(meta.shared_patterns);
    for (KMeansPattern& p : meta.library.patterns) {
        for (double& c : p.centroids) c = static_cast<double>(r.f32());
    }
    meta.codebooks.resize(static_cast<size_t>(meta.shared_patterns) *
                          meta.codebooks_per_pattern);
    for (HuffmanCodebook& cb : meta.codebooks) {
        for (CodeEntry& e : cb.entries) {
            e.length = r.u8();
            e.bits = r.u16();
        }
    }
    if (meta.pattern_index_coding == PatternIndexCoding::huffman) {
        meta.pattern_index_code.resize(meta.shared_patterns);
        for (CodeEntry& e : meta.pattern_index_code) {
            e.length = r.u8();
            e.bits = r.u16();
        }
    }
    r.expect_end();
    try {
        meta.finalize(); // validates every invariant
    } catch (const Error& e) {
        raise(ErrorCode::format, path + ": " + e.what());
    }
    return meta;
}

void save_blob(const CompressedBlob& blob, const std::string& path) {
    ByteWriter w;
    w.bytes(reinterpret_cast<const uint8_t*>("ECCB"), 4);
    w.u16(kFormatVersion);
    w.u8(static_cast<uint8_t>(blob.mode));
    w.u8(2);
    w.u64(blob.rows);
    w.u64(blob.cols);
    w.u64(blob.group_count);
    w.u64(blob.pad_count);
    w.bytes(blob.data.data(), blob.data.size());
    write_file(path, w.buffer());
}

CompressedBlob load_blob(const std::string& path) {
    ByteReader r(read_file(path), path);
    check_magic(r, "ECCB");
    if (r.u16() != kFormatVersion) r.fail("unsupported version");
    CompressedBlob blob;
    const uint8_t mode = r.u8();
    if (mode > 1) r.fail("bad mode");
    blob.mode = static_cast<BlobMode>(mode);
    const uint8_t ndim = r.u8();
    if (ndim != 2) r.fail("unsupported rank");
    blob.rows = r.u64();
    blob.cols = r.u64();
    blob.group_count = r.u64();
    blob.pad_count = r.u64();
    if (blob.rows == 0 || blob.cols == 0) r.fail("zero dimension");
    const size_t group_size =
        blob.mode == BlobMode::ratio4x ? kGroupSize4x : kGroupSize2x;
    const uint64_t n = blob.rows * blob.cols;
    const uint64_t expected_groups = (n + group_size - 1) / group_size;
    if (blob.group_count != expected_groups) {
        r.fail("group count " + std::to_string(blob.group_count) +
               " does not match dims (expected " + std::to_string(expected_groups) + ")");
    }
    if (blob.pad_count != expected_groups * group_size - n) {
        r.fail("pad count does not match dims");
    }
    if (r.remaining() != blob.group_count * kBlockBytes) {
        const uint64_t missing_block = r.remaining() / kBlockBytes;
        raise(ErrorCode::format,
              path + ": truncated blob, block " + std::to_string(missing_block) + " of " +
                  std::to_string(blob.group_count) + " missing (payload ends at byte offset " +
                  std::to_string(r.position() + r.remaining()) + ")");
    }
    blob.data.resize(static_cast<size_t>(blob.group_count * kBlockBytes));
    r.bytes(blob.data.data(), blob.data.size());
    r.expect_end();
    return blob;
}

CompressedBlob compress_4x(const TensorF16& t, const TensorMeta& meta,
                           std::vector<EncodeStats>* stats) {
    const GroupPartition part = partition_groups(t, kGroupSize4x);
    CompressedBlob blob;
    blob.mode = BlobMode::ratio4x;
    blob.rows = t.rows;
    blob.cols = t.cols;
    blob.group_count = part.group_count;
    blob.pad_count = part.pad_elements;
    blob.data.resize(part.group_count * kBlockBytes);
    if (stats) stats->resize(part.group_count);

    parallel_for_index(part.group_count, [&](size_t g) {
        const std::array<double, kGroupSize4x> vals = load_group4x(t, g);
        const Block block = encode_block(vals, meta, stats ? &(*stats)[g] : nullptr);
        std::memcpy(blob.data.data() + g * kBlockBytes, block.data(), kBlockBytes);
    });
    return blob;
}

CompressedBlob compress_2x(const TensorF16& t) {
    const GroupPartition part = partition_groups(t, kGroupSize2x);
    CompressedBlob blob;
    blob.mode = BlobMode::ratio2x;
    blob.rows = t.rows;
    blob.cols = t.cols;
    blob.group_count = part.group_count;
    blob.pad_count = part.pad_elements;
    blob.data.resize(part.group_count * kBlockBytes);

    parallel_for_index(part.group_count, [&](size_t g) {
        std::array<double, kGroupSize2x> vals{};
        load_group(t, g, kGroupSize2x, vals.data());
        const Block block = pack_block2x(quantize_group64(vals));
        std::memcpy(blob.data.data() + g * kBlockBytes, block.data(), kBlockBytes);
    });
    return blob;
}

TensorF16 decompress(const CompressedBlob& blob, const TensorMeta* meta,
                     DecoderKind decoder, std::ostream* trace_out) {
    const uint64_t n = blob.rows * blob.cols;
    std::vector<uint16_t> values(static_cast<size_t>(n));
    const size_t group_size =
        blob.mode == BlobMode::ratio4x ? kGroupSize4x : kGroupSize2x;

    if (blob.mode == BlobMode::ratio4x && meta == nullptr) {
        raise(ErrorCode::invalid_argument, "4x blob requires metadata");
    }

    auto store = [&](size_t g, const uint16_t* recon) {
        const uint64_t base = g * group_size;
        const size_t real = static_cast<size_t>(std::min<uint64_t>(group_size, n - base));
        std::memcpy(values.data() + base, recon, real * sizeof(uint16_t));
    };

    if (trace_out && blob.mode == BlobMode::ratio4x) {
        // Trace output is sequential by construction.
        for (size_t g = 0; g < blob.group_count; ++g) {
            Block block;
            std::memcpy(block.data(), blob.data.data() + g * kBlockBytes, kBlockBytes);
            DecodeTrace trace;
            const auto recon = parallel_decode(block, *meta, &trace);
            write_decode_trace(*trace_out, g, trace);
            store(g, recon.data());
        }
        return TensorF16{blob.rows, blob.cols, std::move(values)};
    }

    parallel_for_index(blob.group_count, [&](size_t g) {
        Block block;
        std::memcpy(block.data(), blob.data.data() + g * kBlockBytes, kBlockBytes);
        if (blob.mode == BlobMode::ratio4x) {
            const auto recon = decoder == DecoderKind::parallel
                                   ? parallel_decode(block, *meta)
                                   : decode_block_reference(block, *meta);
            store(g, recon.data());
        } else {
            const Unpacked2x u = unpack_block2x(block);
            store(g, u.values.data());
        }
    });
    return TensorF16{blob.rows, blob.cols, std::move(values)};
}

void write_encode_log(const std::string& path, const std::vector<EncodeStats>& stats,
                      const std::vector<double>& mse) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        raise(ErrorCode::io, "cannot open " + path + " for writing");
    }
    for (size_t g = 0; g < stats.size(); ++g) {
        nlohmann::json j;
        j["group"] = g;
        j["pattern"] = stats[g].pattern;
        j["codebook"] = stats[g].codebook;
        j["coded_bits"] = stats[g].coded_bits;
        j["clipped"] = stats[g].clipped;
        j["padded"] = stats[g].padded;
        j["histogram"] = stats[g].histogram;
        if (g < mse.size()) j["mse"] = mse[g];
        out << j.dump() << '\n';
    }
    if (!out) {
        raise(ErrorCode::io, "cannot write " + path);
    }
}

std::vector<EncodeLogRecord> read_encode_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        raise(ErrorCode::io, "cannot open " + path);
    }
    std::vector<EncodeLogRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::format,
                  path + ":" + std::to_string(line_no) + ": bad JSON: " + e.what());
        }
        EncodeLogRecord rec;
        rec.stats.pattern = j.at("pattern").get<uint32_t>();
        rec.stats.codebook = j.at("codebook").get<uint32_t>();
        rec.stats.coded_bits = j.at("coded_bits").get<uint32_t>();
        rec.stats.clipped = j.at("clipped").get<uint32_t>();
        rec.stats.padded = j.at("padded").get<uint32_t>();
        const auto hist = j.at("histogram");
        if (!hist.is_array() || hist.size() != 16) {
            raise(ErrorCode::format, path + ":" + std::to_string(line_no) + ": bad histogram");
        }
        for (size_t i = 0; i < 16; ++i) rec.stats.histogram[i] = hist[i].get<uint32_t>();
        if (j.contains("mse")) rec.mse = j["mse"].get<double>();
        records.push_back(rec);
    }
    return records;
}

void write_decode_trace(std::ostream& os, size_t block_index, const DecodeTrace& trace) {
    {
        nlohmann::json j;
        j["block"] = block_index;
        j["stage"] = 0;
        nlohmann::json leaves = nlohmann::json::array();
        for (size_t i = 0; i < trace.leaves.size(); ++i) {
            nlohmann::json offsets = nlohmann::json::array();
            for (const LeafOffsetResult& r : trace.leaves[i].offsets) {
                offsets.push_back({{"symbols", r.count},
                                   {"eop", r.eop},
                                   {"bits", r.bits_used}});
            }
            leaves.push_back({{"segment", i}, {"offsets", offsets}});
        }
        j["leaves"] = leaves;
        os << j.dump() << '\n';
    }
    for (size_t s = 0; s < trace.stages.size(); ++s) {
        nlohmann::json j;
        j["block"] = block_index;
        j["stage"] = s + 1;
        nlohmann::json nodes = nlohmann::json::array();
        for (const NodeSummary& n : trace.stages[s]) {
            nlohmann::json offsets = nlohmann::json::array();
            for (unsigned o = 0; o < kLeafOffsets; ++o) {
                offsets.push_back({{"symbols", n.symbol_count[o]}, {"eop", n.eop[o]}});
            }
            nodes.push_back({{"first_segment", n.first_segment},
                             {"segments", n.segment_count},
                             {"offsets", offsets}});
        }
        j["nodes"] = nodes;
        os << j.dump() << '\n';
    }
    {
        nlohmann::json j;
        j["block"] = block_index;
        j["selected_symbols"] = trace.selected_symbols;
        j["outlier_mask"] = trace.outlier_mask;
        os << j.dump() << '\n';
    }
}

} // namespace ecco
