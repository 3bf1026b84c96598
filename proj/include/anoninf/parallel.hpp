#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace anoninf {

inline int default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs f(i) for i in [0, count) on up to `jobs` threads. Results must be written by index,
// so the outcome never depends on scheduling.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& f) {
    if (jobs <= 0) jobs = default_jobs();
    const std::size_t workers = std::min<std::size_t>(std::size_t(jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_lock;
    auto work = [&] {
        try {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) f(i);
        } catch (...) {
            std::lock_guard lock(error_lock);
            if (!error) error = std::current_exception();
            next = count;
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int jobs, F&& f) {
    std::vector<T> out(count);
    parallel_for(count, jobs, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

} // namespace anoninf
