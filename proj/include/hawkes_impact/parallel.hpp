#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hawkes_impact {

/// Applies fn to every index in [0, n) using up to `threads` workers and
/// returns the results in index order, so reductions over the output are
/// deterministic regardless of the thread count.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int threads,
                            const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    if (n == 0) return out;
    std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
    workers = std::min(workers, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi]() {
            try {
                for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

} // namespace hawkes_impact
