#include "tensor.hpp"

#include <algorithm>
#include <cmath>

namespace ecco {

TensorF16 make_tensor(uint64_t rows, uint64_t cols, std::vector<uint16_t> bits) {
    if (rows == 0 || cols == 0) {
        raise(ErrorCode::invalid_argument, "empty tensor");
    }
    if (bits.size() != rows * cols) {
        raise(ErrorCode::invalid_argument, "tensor payload size mismatch");
    }
    for (uint16_t b : bits) {
        if (!fp16_is_finite(b)) {
            raise(ErrorCode::invalid_argument, "tensor contains non-finite values");
        }
    }
    return TensorF16{rows, cols, std::move(bits)};
}

GroupPartition partition_groups(const TensorF16& t, size_t group_size) {
    const uint64_t n = t.element_count();
    if (n == 0) {
        raise(ErrorCode::invalid_argument, "empty tensor");
    }
    GroupPartition p;
    p.group_count = static_cast<size_t>((n + group_size - 1) / group_size);
    p.pad_elements = p.group_count * group_size - static_cast<size_t>(n);
    return p;
}

void load_group(const TensorF16& t, size_t group, size_t group_size, double* out) {
    const uint64_t n = t.element_count();
    const uint64_t base = static_cast<uint64_t>(group) * group_size;
    for (size_t i = 0; i < group_size; ++i) {
        const uint64_t idx = base + i;
        out[i] = idx < n ? fp16_to_double(t.values[static_cast<size_t>(idx)]) : 0.0;
    }
}

double tensor_absmax(const TensorF16& t) {
    double m = 0.0;
    for (uint16_t b : t.values) {
        m = std::max(m, std::fabs(fp16_to_double(b)));
    }
    return m;
}

} // namespace ecco
