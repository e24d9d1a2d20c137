#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace portspill {

// Worker count used by data-parallel loops (set from --threads). Results
// never depend on it: workers write disjoint output ranges.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls fn(begin, end) over contiguous chunks of [0, n).
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    if (n) fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace portspill
