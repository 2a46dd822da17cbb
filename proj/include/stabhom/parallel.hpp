#pragma once

#include <cstddef>
#include <functional>

namespace stabhom {

// Worker count used when a caller passes 0.
int default_workers();

// Runs body(chunk) for chunk in [0, chunks) on up to `workers` threads. Chunks
// are handed out in increasing order; callers merge per-chunk results in chunk
// order so output never depends on scheduling. The first exception thrown by a
// chunk is rethrown after all threads have joined.
void parallel_for(std::size_t chunks, int workers, const std::function<void(std::size_t)>& body);

}  // namespace stabhom
