#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace reclab {

// Splits [0, count) into `workers` contiguous ranges, runs fn(begin, end) on
// each, and returns the partial results in range order. Callers merge them
// with an associative operation so the outcome is independent of `workers`.
template <class Fn>
auto parallel_ranges(std::uint64_t count, unsigned workers, Fn fn) {
  using Result = decltype(fn(std::uint64_t{0}, std::uint64_t{0}));
  workers = std::max(1u, workers);
  if (count < workers) workers = static_cast<unsigned>(std::max<std::uint64_t>(count, 1));
  std::vector<Result> results(workers);
  if (workers == 1) {
    results[0] = fn(0, count);
    return results;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = count * w / workers;
    const std::uint64_t end = count * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        results[w] = fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace reclab
