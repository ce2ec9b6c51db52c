#pragma once

#include <cstddef>
#include <functional>

namespace cpk {

// Worker count: hardware concurrency capped by CPK_THREADS when set.
int worker_count();

// Runs fn(i) for i in [0, n). Each index is owned by exactly one worker, so
// writing results[i] from fn keeps the output order deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cpk
