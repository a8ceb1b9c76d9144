#pragma once

#include <cstddef>
#include <functional>

namespace specmatch {

// Process-wide worker cap for data-parallel loops. 1 by default; the CLI
// raises it via --threads. Results never depend on the thread count: loops
// only write disjoint output ranges.
void set_thread_count(int threads);
int thread_count();

// Runs fn(begin, end) over a partition of [0, n). Executes inline when the
// effective thread count is 1 or the range is small.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace specmatch
