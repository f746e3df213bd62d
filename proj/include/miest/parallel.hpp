#pragma once

#include <cstddef>
#include <functional>

namespace miest {

// Runs fn(i) for i in [0, count) on up to `workers` threads (0 = hardware
// concurrency). Tasks are claimed dynamically; fn must write only to slots it
// owns. The first exception thrown by any task is rethrown after all workers
// join.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

unsigned resolve_workers(unsigned requested) noexcept;

}  // namespace miest
