#pragma once

#include <cstddef>
#include <functional>

namespace qantenna {

// Runs fn(0..n-1) on up to `jobs` threads. Each index is processed exactly
// once; results must be written to per-index slots. The first exception is
// rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace qantenna
