#pragma once

#include <cstddef>
#include <functional>

namespace stripes {

// requested > 0 wins; otherwise STRIPES_THREADS, otherwise hardware concurrency.
int resolve_threads(int requested = 0);
void set_default_threads(int threads);

// Calls fn(i) for i in [0, count) on up to `threads` workers. The first
// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, int threads = 0);

}  // namespace stripes
