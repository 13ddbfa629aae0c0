#pragma once

#include <cstddef>
#include <functional>

namespace synthpop {

/// Worker count: SYNTHPOP_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_limit();

/// Runs fn(i) for i in [0, n) on up to thread_limit() threads. Work is split
/// into contiguous blocks; fn must only write state owned by index i. The first
/// exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace synthpop
