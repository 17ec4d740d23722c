#pragma once

#include <cstddef>
#include <functional>

namespace latentconn {

/// Worker count: hardware concurrency, capped by LATENTCONN_THREADS when set.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n). Each index is handled by exactly one worker,
/// so callers that write only slot i get output independent of scheduling.
/// The first exception thrown by any worker is rethrown after all join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace latentconn
