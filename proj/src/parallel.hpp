#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace pgraph::detail {

/// Calls fn(begin, end) over [0, count), split into contiguous chunks when
/// more than one worker is requested and the range is large enough.
template <class Fn>
void parallel_for(long count, int threads, Fn&& fn, long min_chunk = 2048) {
  const long workers = std::min<long>(threads, count / std::max(1L, min_chunk));
  if (workers <= 1) {
    fn(0L, count);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const long step = (count + workers - 1) / workers;
  for (long w = 1; w < workers; ++w) {
    const long begin = w * step;
    const long end = std::min(count, begin + step);
    if (begin < end) pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  fn(0L, std::min(count, step));
}

}  // namespace pgraph::detail
