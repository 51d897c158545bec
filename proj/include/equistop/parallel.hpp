#pragma once

#include <cstddef>
#include <functional>

namespace equistop {

/// Worker count to use for `requested` (<= 0 selects the machine parallelism).
int resolve_threads(int requested);

/// Runs fn(0..n-1) on up to `threads` workers. Tasks are claimed dynamically,
/// so fn must write only to slots owned by its index. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace equistop
