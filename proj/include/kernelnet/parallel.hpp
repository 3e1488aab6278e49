#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace kernelnet {

/// Worker count used when a caller passes threads == 0.
unsigned default_threads() noexcept;
void set_default_threads(unsigned threads) noexcept;

/// Evaluates body(i) for i in [0, n) on up to `threads` workers and returns the
/// results indexed by i. Callers reduce the vector themselves, in index order,
/// so aggregates do not depend on the worker count.
template <class T, class Body>
std::vector<T> parallel_map(std::size_t n, Body&& body, unsigned threads = 0) {
  std::vector<T> out(n);
  if (threads == 0) threads = default_threads();
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = body(i);
    return out;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = body(i);
    });
  }
  pool.clear();
  return out;
}

/// Sum of body(i) over [0, n), reduced in index order.
template <class Body>
double parallel_sum(std::size_t n, Body&& body, unsigned threads = 0) {
  const auto parts = parallel_map<double>(n, std::forward<Body>(body), threads);
  double s = 0.0;
  for (double v : parts) s += v;
  return s;
}

}  // namespace kernelnet
