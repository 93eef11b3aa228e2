#pragma once

#include <cstddef>
#include <functional>

namespace gnrrm {

// Calls fn(k) for k in [0, count) on up to `threads` workers. Work items must
// write to disjoint outputs; callers reduce in index order afterwards so the
// result never depends on the thread count. The first exception is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Stops glibc from returning freed trace buffers to the OS between batches;
// otherwise every forward pass pays page faults on fresh memory. No-op on
// other C libraries. Safe to call repeatedly.
void retain_heap_memory();

}  // namespace gnrrm
