#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "fp16.hpp"

namespace ecco {

inline constexpr size_t kGroupSize4x = 128;
inline constexpr size_t kGroupSize2x = 64;
inline constexpr size_t kBlockBytes = 64;
inline constexpr size_t kBlockBits = 512;

// Fixed 512-bit compressed block, the unit both codecs emit.
using Block = std::array<uint8_t, kBlockBytes>;

// 2-D row-major tensor of binary16 bit patterns.
struct TensorF16 {
    uint64_t rows = 0;
    uint64_t cols = 0;
    std::vector<uint16_t> values;

    uint64_t element_count() const { return rows * cols; }
};

TensorF16 make_tensor(uint64_t rows, uint64_t cols, std::vector<uint16_t> bits);

struct GroupPartition {
    size_t group_count = 0;
    size_t pad_elements = 0; // zero pads appended to the final partial group
};

GroupPartition partition_groups(const TensorF16& t, size_t group_size);

// Group g covers flat elements [g*group_size, (g+1)*group_size), zero-padded
// past the tensor end.
void load_group(const TensorF16& t, size_t group, size_t group_size, double* out);

inline std::array<double, kGroupSize4x> load_group4x(const TensorF16& t, size_t group) {
    std::array<double, kGroupSize4x> g;
    load_group(t, group, kGroupSize4x, g.data());
    return g;
}

double tensor_absmax(const TensorF16& t);

} // namespace ecco
