#pragma once

#include <cstddef>
#include <functional>

namespace pvgap {

/// Worker count: PVGAP_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
int worker_count();

/// Runs fn(0..n-1) across worker_count() threads. Each index runs exactly
/// once; results must be written to per-index slots so the outcome does not
/// depend on scheduling. The first exception thrown is rethrown after all
/// workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace pvgap
