#pragma once

#include <cstddef>
#include <cstdint>

#include "error.hpp"

namespace ecco {

// Bit addressing within a block: bit b lives in byte b/8 at in-byte position
// b%8, counted from the least-significant bit. Multi-bit fields are stored
// little endian (field bit 0 at the lowest stream position).

class BitWriter {
public:
    BitWriter(uint8_t* data, size_t capacity_bits)
        : data_(data), capacity_(capacity_bits) {}

    void write(uint64_t value, unsigned width) {
        write_at(cursor_, value, width);
        cursor_ += width;
    }

    void write_at(size_t pos, uint64_t value, unsigned width) const {
        if (width > 64) {
            raise(ErrorCode::invalid_argument, "bit width exceeds 64");
        }
        if (width < 64 && (value >> width) != 0) {
            raise(ErrorCode::invalid_argument, "value does not fit in bit width");
        }
        if (pos + width > capacity_) {
            raise(ErrorCode::overflow, "block overflow");
        }
        for (unsigned i = 0; i < width; ++i) {
            const size_t b = pos + i;
            const uint8_t bit = static_cast<uint8_t>((value >> i) & 1u);
            data_[b / 8] = static_cast<uint8_t>((data_[b / 8] & ~(1u << (b % 8))) | (bit << (b % 8)));
        }
    }

    size_t position() const { return cursor_; }
    void seek(size_t pos) { cursor_ = pos; }

private:
    uint8_t* data_;
    size_t capacity_;
    size_t cursor_ = 0;
};

class BitReader {
public:
    BitReader(const uint8_t* data, size_t capacity_bits)
        : data_(data), capacity_(capacity_bits) {}

    uint64_t read(unsigned width) {
        const uint64_t v = read_at(cursor_, width);
        cursor_ += width;
        return v;
    }

    uint64_t read_at(size_t pos, unsigned width) const {
        if (width > 64) {
            raise(ErrorCode::invalid_argument, "bit width exceeds 64");
        }
        if (pos + width > capacity_) {
            raise(ErrorCode::overflow, "block overflow");
        }
        uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) {
            const size_t b = pos + i;
            v |= static_cast<uint64_t>((data_[b / 8] >> (b % 8)) & 1u) << i;
        }
        return v;
    }

    size_t position() const { return cursor_; }
    void seek(size_t pos) { cursor_ = pos; }

private:
    const uint8_t* data_;
    size_t capacity_;
    size_t cursor_ = 0;
};

// Read `width` bits at `pos`, treating every bit at or past `capacity_bits`
// as zero. The parallel decoder's last segment window hangs past the block
// end and relies on this.
inline uint32_t read_bits_zero_extended(const uint8_t* data, size_t capacity_bits,
                                        size_t pos, unsigned width) {
    uint32_t v = 0;
    for (unsigned i = 0; i < width; ++i) {
        const size_t b = pos + i;
        if (b >= capacity_bits) break;
        v |= static_cast<uint32_t>((data[b / 8] >> (b % 8)) & 1u) << i;
    }
    return v;
}

} // namespace ecco
