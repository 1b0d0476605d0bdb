#pragma once

#include <cstddef>
#include <functional>

namespace doalab {

/// Hardware concurrency, capped by the DOA_LAB_THREADS environment variable when set.
[[nodiscard]] unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads);

}  // namespace doalab
