#pragma once

#include <cstddef>
#include <functional>

namespace pot {

/// Worker count: POT_SIM_THREADS if set and positive (capped by the hardware),
/// otherwise std::thread::hardware_concurrency().
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Indices are
/// handed out in increasing order; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pot
