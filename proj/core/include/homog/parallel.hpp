#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace homog {

/// Run fn(i) for i in [0, n) across `workers` threads; results land in a
/// vector indexed by i, so any later reduction is fixed-order and the output
/// is independent of the worker count. A worker exception aborts the run and
/// is rethrown (no partial silent results).
template <class T>
std::vector<T> parallel_map(std::size_t n, int workers,
                            const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    if (n == 0) return out;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load(std::memory_order_relaxed)) return;
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::scoped_lock lk(err_mu);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace homog
