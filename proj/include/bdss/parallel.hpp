#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace bdss {

// Worker cap for parallel_for. Defaults to 1; the CLI raises it via --threads.
void set_max_threads(int n);
int max_threads();

// Splits [begin, end) into one contiguous chunk per worker and runs fn(lo, hi)
// on each. Chunks must write disjoint outputs and keep any reduction inside a
// single index, so results do not depend on the worker count.
template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, Fn&& fn) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  const std::int64_t workers = std::min<std::int64_t>(max_threads(), count);
  if (workers <= 1) {
    fn(begin, end);
    return;
  }
  const std::int64_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (std::int64_t w = 1; w < workers; ++w) {
    const std::int64_t lo = begin + w * chunk;
    const std::int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(begin, std::min(end, begin + chunk));
  for (auto& t : pool) t.join();
}

}  // namespace bdss
