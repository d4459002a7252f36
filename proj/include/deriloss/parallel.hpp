#pragma once

#include <cstddef>
#include <functional>

namespace deriloss {

/// Worker count: DERILOSS_THREADS if set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t thread_cap();

/// Runs body(i) for i in [0, n) on up to thread_cap() threads. If any call
/// throws, the exception from the smallest index is rethrown after all
/// workers finish, so failures are reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace deriloss
