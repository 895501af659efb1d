#pragma once

#include <cstddef>
#include <functional>

namespace ecco {

// Thread budget: ECCO_THREADS environment variable caps parallelism,
// 0 or unset means hardware concurrency.
unsigned thread_budget();

// Runs fn(i) for i in [0, n) across the thread budget. Work items must be
// independent; callers that reduce should write per-index slots and combine
// in index order afterwards so results do not depend on the thread count.
void parallel_for_index(size_t n, const std::function<void(size_t)>& fn);

} // namespace ecco
