#pragma once

#include <cstdint>

namespace ecco {

// Randomized parallel-vs-reference decoder equivalence sweep across weight
// and kv modes, fixed and huffman pattern coding, S in {16, 64} and H in
// {1, 4}, plus crafted forced-clip and forced-max-pad blocks. Throws
// ErrorCode::internal on the first mismatch; returns blocks compared.
uint64_t run_equivalence_selftest(uint64_t seed, uint64_t min_blocks = 10000);

} // namespace ecco
