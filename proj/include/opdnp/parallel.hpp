#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace opdnp {

// Failure of one task in a parallel batch, tagged with its index.
struct TaskError : std::runtime_error {
  std::size_t task;
  TaskError(std::size_t index, const std::string& what)
      : std::runtime_error("task " + std::to_string(index) + ": " + what), task(index) {}
};

inline unsigned default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n ? n : 1;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results land at their
// index, so the output never depends on scheduling. The lowest failing index
// is rethrown as TaskError after all workers stop.
template <typename R, typename Fn>
std::vector<R> parallel_map(std::size_t n, unsigned workers, Fn fn) {
  std::vector<R> out(n);
  if (n == 0) return out;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw TaskError(i, e.what());
      } catch (...) {
        throw TaskError(i, "unknown failure");
      }
    }
  return out;
}

}  // namespace opdnp
