#pragma once

#include <cstddef>
#include <functional>

namespace amppi {

// Global worker-count knob (0 = hardware concurrency). Set once at startup.
void set_worker_count(unsigned n);
unsigned worker_count();

// Runs fn(begin, end) over a static partition of [0, n). Each index is
// visited exactly once and fn may only write per-index slots, so results
// are identical for every worker count. Nested calls run serially.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace amppi
