#include "specmatch/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace specmatch {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) {
  if (threads < 1) threads = 1;
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw > 0) threads = std::min(threads, hw);
  g_threads.store(threads);
}

int thread_count() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const int threads = thread_count();
  if (n == 0) return;
  if (threads <= 1 || n < 256) {
    fn(0, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace specmatch
