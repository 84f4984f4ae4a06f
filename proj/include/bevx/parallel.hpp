#pragma once

#include <cstddef>
#include <functional>

namespace bevx {

// Worker count for row-parallel kernels: BEVX_THREADS when set to a positive
// integer, otherwise the hardware concurrency.
std::size_t thread_count();

// Overrides the environment; 0 restores it. Used by tests.
void set_thread_count(std::size_t n);

// Calls body(begin, end) on disjoint contiguous chunks covering [0, n).
// Each index is visited exactly once, so per-row results do not depend on
// the thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace bevx
