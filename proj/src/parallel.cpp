#include "calabi/parallel.h"

#include <atomic>

namespace calabi {

namespace {
std::atomic<std::size_t> g_workers{0};
}

void set_worker_threads(std::size_t count) { g_workers.store(count); }

std::size_t worker_threads() {
    const std::size_t configured = g_workers.load();
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for_index(std::size_t count,
                        const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(worker_threads(), std::max<std::size_t>(count, 1));
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t block = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * block;
        const std::size_t hi = std::min(count, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace calabi
