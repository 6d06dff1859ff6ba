#pragma once

#include <cstddef>
#include <functional>

namespace diskpatch {

// Worker count used by the heavy loops; results never depend on it.
void set_thread_count(int n);
int thread_count();

// Calls fn(i) for i in [0, n) over contiguous blocks.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace diskpatch
