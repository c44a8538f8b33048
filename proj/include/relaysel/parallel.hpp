#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace relaysel {

// RELAYSEL_JOBS if set, else the hardware concurrency.
inline std::size_t default_jobs() {
  if (const char* env = std::getenv("RELAYSEL_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on up to `jobs` threads. Each worker gets its
// own `State` (e.g. a solver cache). The first exception is rethrown after all
// workers stop.
template <typename State, typename Body>
void parallel_for_with(std::size_t n, std::size_t jobs, Body&& body) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  auto worker = [&] {
    State state{};
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i, state);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

template <typename Body>
void parallel_for(std::size_t n, std::size_t jobs, Body&& body) {
  struct None {};
  parallel_for_with<None>(n, jobs, [&](std::size_t i, None&) { body(i); });
}

}  // namespace relaysel
