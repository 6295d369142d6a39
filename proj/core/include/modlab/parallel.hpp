#pragma once

#include <cstddef>
#include <functional>

namespace modlab {

// Worker count: MODLAB_THREADS if set and positive, otherwise the hardware
// concurrency (at least 1).
unsigned thread_count();

// Runs body(i) for i in [0, n). Work is split into contiguous chunks so
// each index is handled by exactly one worker; callers write results into
// per-index slots, which keeps every reduction order fixed.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace modlab
