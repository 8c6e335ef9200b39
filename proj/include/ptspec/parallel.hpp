#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ptspec {

// Worker count used when a caller passes 0.
inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// out[i] = fn(in[i]); order of results never depends on scheduling. The first
// exception thrown by any call is rethrown after all workers stop.
template <class In, class Fn>
auto parallel_map(const std::vector<In>& in, Fn fn, unsigned workers = 0) {
  using Out = decltype(fn(in.front()));
  std::vector<Out> out(in.size());
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, in.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::atomic_flag error_set = ATOMIC_FLAG_INIT;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= in.size() || failed.load()) return;
      try {
        out[i] = fn(in[i]);
      } catch (...) {
        if (!error_set.test_and_set()) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace ptspec
