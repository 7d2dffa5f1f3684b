#pragma once

#include <cstddef>
#include <functional>

namespace spraylab {

/// Worker count: SPRAYLAB_THREADS if set (>= 1), otherwise the hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, count). Work is split into contiguous chunks; callers write
/// results by index, so the outcome does not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace spraylab
