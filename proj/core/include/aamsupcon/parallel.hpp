#pragma once

#include <cstddef>
#include <functional>

namespace aamsupcon {

/// Worker count used by parallel_for. Initialized from the AAMSUPCON_THREADS
/// environment variable (default 1).
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n) split into contiguous chunks across
/// thread_count() workers. Each index is visited exactly once, so a body that
/// only writes slot i produces results independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace aamsupcon
