#pragma once

#include <cstddef>
#include <functional>

namespace hashbreak {

// Worker count: HASHBREAK_THREADS when set to a positive integer, otherwise
// std::thread::hardware_concurrency() (at least 1).
std::size_t default_thread_count();

// Runs body(i) for i in [0, n) on up to `threads` threads. Indices are handed
// out dynamically, so body must write only to per-index state; callers reduce
// afterwards in index order. The first exception thrown by any body is
// rethrown after all workers have stopped.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

} // namespace hashbreak
