#pragma once

#include <cstddef>
#include <functional>

namespace dnls {

/// Upper bound on worker threads for parallel loops; 0 restores the hardware default.
void set_thread_cap(unsigned n);
unsigned thread_cap();

/// Runs body(i) for i in [0, n) on up to thread_cap() threads. Iterations must
/// be independent; the first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dnls
