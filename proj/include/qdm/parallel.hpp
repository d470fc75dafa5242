// Copyright 2026 The qdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qdm {

/// Worker count: QDM_THREADS if set (0 = hardware concurrency), else 1.
inline unsigned thread_count() {
  static const unsigned n = [] {
    const char* env = std::getenv("QDM_THREADS");
    if (!env || !*env) return 1u;
    long v = std::strtol(env, nullptr, 10);
    if (v <= 0) return std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(v);
  }();
  return n;
}

namespace detail {
inline thread_local bool in_parallel_region = false;
}

/// Runs f(i) for i in [0, count). Each index writes its own output slot, so
/// results do not depend on scheduling. Nested calls run serially. The first
/// exception thrown is rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t count, F&& f) {
  const unsigned workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1 || detail::in_parallel_region) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    detail::in_parallel_region = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
    detail::in_parallel_region = false;
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qdm
