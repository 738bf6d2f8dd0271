#pragma once

#include <cstddef>
#include <functional>

namespace kglink {

// Thread cap from KG_LINKER_THREADS; defaults to 1 (fully serial) when the
// variable is unset or unparsable.
size_t configured_threads();

// Runs fn(i) for i in [0, n) across up to `threads` workers with a static
// partition. Results must be written to per-index slots, which keeps the
// merge deterministic regardless of scheduling. The first exception thrown
// by a worker is rethrown on the calling thread.
void parallel_for(size_t n, size_t threads, const std::function<void(size_t)>& fn);

}  // namespace kglink
