#include "parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ecco {

unsigned thread_budget() {
    unsigned n = 0;
    if (const char* env = std::getenv("ECCO_THREADS")) {
        n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (n == 0) {
        n = std::thread::hardware_concurrency();
    }
    return n == 0 ? 1 : n;
}

void parallel_for_index(size_t n, const std::function<void(size_t)>& fn) {
    if (n == 0) return;
    const unsigned workers = static_cast<unsigned>(
        std::min<size_t>(thread_budget(), n));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        // Coarse self-scheduling chunks; assignment order does not matter
        // because items are independent.
        const size_t chunk = std::max<size_t>(1, n / (workers * 8));
        for (;;) {
            const size_t begin = next.fetch_add(chunk);
            if (begin >= n) break;
            const size_t end = std::min(n, begin + chunk);
            try {
                for (size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace ecco
