#pragma once

#include <cstdint>
#include <functional>

namespace axiscat {

// Global worker count used by parallel_for. 0 = hardware concurrency.
void set_thread_count(int n);
int thread_count();

namespace detail {

// Runs fn(begin, end) over a static partition of [0, n) across the configured
// number of threads. Partitioning is by contiguous blocks; per-index results
// must not depend on the partition so that output is identical for any
// thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace detail
}  // namespace axiscat
