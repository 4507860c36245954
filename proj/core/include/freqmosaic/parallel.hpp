#pragma once

#include <cstddef>
#include <functional>

namespace freqmosaic {

/// Worker count from FREQMOSAIC_THREADS; unset, 0 or unparsable means one
/// worker per hardware thread.
std::size_t threads_from_env();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). The first exception thrown by any call is rethrown after
/// all workers finish. Callers own determinism: results must be written to
/// per-index slots.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace freqmosaic
