#pragma once

#include <cstddef>
#include <functional>

namespace spectral_eta {

/// Worker count for parallel_for; 0 means hardware concurrency.
void set_thread_count(int threads);
int thread_count();

/// Runs body(i) for i in [0, count). The first exception thrown by any
/// worker is rethrown on the calling thread once all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace spectral_eta
