// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/ad/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pdr::ad {
namespace {

int initial_threads() {
  if (const char* env = std::getenv("PDR_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      return 1;
    }
  }
  return 1;
}

std::atomic<int>& thread_count() {
  static std::atomic<int> count{initial_threads()};
  return count;
}

thread_local bool in_parallel_region = false;

}  // namespace

void set_num_threads(int threads) { thread_count() = std::max(1, threads); }

int num_threads() { return thread_count(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
  const std::int64_t workers = in_parallel_region ? 1 : std::min<std::int64_t>(num_threads(), n);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (std::int64_t w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min(n, begin + chunk);
    pool.emplace_back([begin, end, &body, &error, &error_mutex] {
      in_parallel_region = true;
      try {
        for (std::int64_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace pdr::ad
