#pragma once

#include <functional>

namespace ftsx {

/// Worker count: FTSX_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace ftsx
