#include "wanco/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace wanco {
namespace {

std::atomic<std::size_t> g_override{0};

std::size_t env_workers() {
  static const std::size_t value = [] {
    const char* raw = std::getenv("WANCO_THREADS");
    if (raw == nullptr || *raw == '\0') return std::size_t{1};
    try {
      const long n = std::stol(raw);
      return n <= 0 ? std::size_t{1} : static_cast<std::size_t>(n);
    } catch (...) {
      return std::size_t{1};
    }
  }();
  return value;
}

}  // namespace

std::size_t worker_count() {
  const std::size_t o = g_override.load();
  return o != 0 ? o : env_workers();
}

void set_worker_count(std::size_t n) { g_override.store(n); }

void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), n_tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < n_tasks; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace wanco
