#include "cmcf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cmcf {

int thread_count() {
  const char* env = std::getenv("CMCF_THREADS");
  int requested = 1;
  if (env) {
    requested = std::max(1, std::atoi(env));
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return std::min<int>(requested, static_cast<int>(hw));
}

void parallel_for(std::int64_t total,
                  const std::function<void(std::int64_t, std::int64_t)>& fn) {
  const int workers = thread_count();
  if (workers <= 1 || total <= kParallelChunk) {
    for (std::int64_t begin = 0; begin < total; begin += kParallelChunk)
      fn(begin, std::min(begin + kParallelChunk, total));
    return;
  }
  std::atomic<std::int64_t> cursor{0};
  auto body = [&] {
    for (;;) {
      std::int64_t begin = cursor.fetch_add(kParallelChunk);
      if (begin >= total) return;
      fn(begin, std::min(begin + kParallelChunk, total));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

}  // namespace cmcf
