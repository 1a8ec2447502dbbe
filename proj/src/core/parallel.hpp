#pragma once

#include <cstddef>
#include <functional>

namespace isovol {

// Number of worker threads to use when `requested` <= 0.
int default_threads();

// Runs task(i) for i in [0, count) on up to `threads` threads. Exceptions are
// collected and the one from the lowest failing index is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace isovol
