#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace realpoints {

/// Run f(i) for i in [0, n) across `jobs` worker threads. Work items are
/// independent; callers index results by i so the merge is deterministic.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
  if (jobs <= 0) jobs = int(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        int i = next.fetch_add(1);
        if (i >= n) break;
        f(i);
      }
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace realpoints
