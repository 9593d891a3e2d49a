#include "mnpiv/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace mnpiv {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("MNPIV_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_index(std::size_t count, int threads,
                        const std::function<void(std::size_t)>& task) {
    threads = resolve_threads(threads);
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    const std::size_t nworkers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (std::size_t t = 0; t < nworkers; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < count; i += nworkers) {
                    if (failed.load(std::memory_order_relaxed)) return;
                    task(i);
                }
            } catch (...) {
                bool expected = false;
                if (failed.compare_exchange_strong(expected, true))
                    error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace mnpiv
