#pragma once

#include <cstddef>
#include <functional>

namespace wext {

// Thread cap for the dense kernels, read once from WEXT_THREADS (default 1).
// Work is split into contiguous index chunks with disjoint writes, so results
// are bitwise identical at any thread count.
int kernel_threads();

// Runs fn(begin, end) over [0, n) split across kernel_threads() chunks.
// Falls back to a single call when the range is small.
void parallel_chunks(std::ptrdiff_t n,
                     const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn);

}  // namespace wext
