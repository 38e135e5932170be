#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace detect {

/// Number of workers for `requested` (0 means hardware concurrency).
inline std::size_t resolve_jobs(std::size_t requested) noexcept {
    if (requested > 0) return requested;
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls fn(i) for i in [0, count) on up to `jobs` threads. Work items are
/// claimed dynamically, so fn must write only to slot i of its outputs.
/// The first exception thrown by any worker is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::min(resolve_jobs(jobs), count);
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
            }
        }
    };
    {
        std::vector<std::jthread> threads;
        threads.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace detect
