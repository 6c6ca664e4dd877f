#pragma once

#include <cstddef>
#include <functional>

namespace memstate {

// Worker count: explicit request if non-zero, else MEMSTATE_THREADS if set
// and non-zero, else hardware concurrency.
unsigned resolve_threads(unsigned requested = 0);

// Calls body(k) for k in [0, n) across `threads` workers, static chunking.
// The first exception thrown by any worker is rethrown after all join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

} // namespace memstate
