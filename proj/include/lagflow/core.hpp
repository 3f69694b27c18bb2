#pragma once
// Shared basics: version, error types, constants, worker-count policy.
// The whole library is header-only and deterministic: given the same inputs
// and seed, every function returns bit-identical results.

#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lagflow {

inline constexpr const char* version_string = "0.1.0";

inline constexpr double pi = 3.14159265358979323846;

// A documented precondition was violated (bad dimension, malformed config,
// parameter outside its admissible range).  The CLI maps this to exit code 2.
struct invalid_input : std::invalid_argument {
  explicit invalid_input(const std::string& msg) : std::invalid_argument(msg) {}
};

// A grid or profile is too coarse for the requested construction.
struct resolution_error : std::runtime_error {
  explicit resolution_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A query fell outside the stored sample range; nothing extrapolates.
struct out_of_range_error : std::runtime_error {
  explicit out_of_range_error(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN, divergence, or an iteration cap.  The CLI maps this to exit code 3.
struct numerical_abort : std::runtime_error {
  explicit numerical_abort(const std::string& msg) : std::runtime_error(msg) {}
};

// Worker count for node-parallel loops, from LAGFLOW_THREADS (default 1).
// Loop results never depend on it: maps write disjoint slots and reductions
// are min/max combined in fixed chunk order.
inline int thread_count() {
  if (const char* env = std::getenv("LAGFLOW_THREADS")) {
    char* end = nullptr;
    long k = std::strtol(env, &end, 10);
    if (end && *end == '\0' && k >= 1 && k <= 256) return static_cast<int>(k);
  }
  return 1;
}

// Runs fn(i) for i in [0, count) on thread_count() workers, each owning a
// contiguous index block.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const int workers = thread_count();
  if (workers <= 1 || count < 2048) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] { for (std::size_t i = lo; i < hi; ++i) fn(i); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace lagflow
