#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "codec4x.hpp"
#include "pardec.hpp"
#include "tensor.hpp"

namespace ecco {

// On-disk formats, all integers little endian:
//   ECCT  tensor:   magic, version u16, dtype u8 (1 = fp16), ndim u8,
//                   dims u64 each, payload of raw fp16 bit patterns.
//   ECCM  metadata: magic, version u16, mode u8, pattern coding u8,
//                   scale exponent i16, S u16, H u16, S*15 centroids f32,
//                   S*H codebooks of 16 (length u8, code u16) entries,
//                   optional pattern-index code table of S entries.
//   ECCB  blob:     magic, version u16, mode u8 (0 = 4x, 1 = 2x), ndim u8,
//                   dims u64 each, group count u64, pad count u64, then raw
//                   64-byte blocks in group order.

inline constexpr uint16_t kFormatVersion = 1;

enum class BlobMode : uint8_t {
    ratio4x = 0,
    ratio2x = 1,
};

struct CompressedBlob {
    BlobMode mode = BlobMode::ratio4x;
    uint64_t rows = 0;
    uint64_t cols = 0;
    uint64_t group_count = 0;
    uint64_t pad_count = 0;
    std::vector<uint8_t> data; // group_count * 64 bytes
};

void save_tensor(const TensorF16& t, const std::string& path);
TensorF16 load_tensor(const std::string& path);

void save_meta(const TensorMeta& meta, const std::string& path);
TensorMeta load_meta(const std::string& path);

// Byte image identical to what save_meta writes; calibrate determinism is
// checked against this.
std::vector<uint8_t> serialize_meta(const TensorMeta& meta);

void save_blob(const CompressedBlob& blob, const std::string& path);
CompressedBlob load_blob(const std::string& path);

CompressedBlob compress_4x(const TensorF16& t, const TensorMeta& meta,
                           std::vector<EncodeStats>* stats = nullptr);
CompressedBlob compress_2x(const TensorF16& t);

// meta may be null for 2x blobs. trace_out, when set, receives JSON-lines of
// the parallel decoder's per-stage results (parallel decoder only).
TensorF16 decompress(const CompressedBlob& blob, const TensorMeta* meta,
                     DecoderKind decoder, std::ostream* trace_out = nullptr);

// JSON-lines encode log, one record per group. `mse` is optional per-group
// reconstruction error, written when non-empty.
void write_encode_log(const std::string& path, const std::vector<EncodeStats>& stats,
                      const std::vector<double>& mse = {});
struct EncodeLogRecord {
    EncodeStats stats;
    double mse = -1.0; // negative when absent
};
std::vector<EncodeLogRecord> read_encode_log(const std::string& path);

void write_decode_trace(std::ostream& os, size_t block_index, const DecodeTrace& trace);

} // namespace ecco
