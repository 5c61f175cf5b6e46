#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hexedge {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results are written by index,
// so the output order never depends on scheduling.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

template <class T, class Fn>
std::vector<T> parallel_map(int n, int threads, Fn&& fn) {
  std::vector<T> out(n);
  parallel_for(n, threads, [&](int i) { out[i] = fn(i); });
  return out;
}

}  // namespace hexedge
