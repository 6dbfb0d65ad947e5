#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace hdg::detail {

// Splits [0, count) into `threads` contiguous chunks; chunk w runs on
// worker w (worker 0 on the calling thread). Chunk boundaries depend only
// on (count, threads).
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    fn(std::size_t{0}, count, 0u);
    return;
  }
  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (unsigned w = 1; w < threads; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    if (begin < end) pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
  }
  fn(std::size_t{0}, std::min(count, chunk), 0u);
}

}  // namespace hdg::detail
