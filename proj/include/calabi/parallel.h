#pragma once
// Deterministic parallel loop: the index space is split into contiguous
// blocks, each index is processed exactly once, and tasks write only to
// their own slots, so results are identical for any thread count.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace calabi {

// Global worker-count knob (set from the CLI); 0 means "hardware default".
void set_worker_threads(std::size_t count);
std::size_t worker_threads();

// Runs fn(i) for i in [0, count) on up to worker_threads() threads.
// fn must confine its writes to per-index state.
void parallel_for_index(std::size_t count,
                        const std::function<void(std::size_t)>& fn);

}  // namespace calabi
