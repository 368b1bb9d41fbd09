#pragma once

#include <cstddef>
#include <functional>

namespace arground {

/// Runs fn(0) .. fn(n - 1) on up to `workers` threads. Every index runs even
/// if others fail; afterwards the exception of the lowest failing index is
/// rethrown, so failures are reported the same way for any worker count.
void parallel_for_index(std::size_t n, std::size_t workers,
                        const std::function<void(std::size_t)>& fn);

}  // namespace arground
