#include "setreg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace setreg::parallel {

namespace {

std::atomic<unsigned> g_threads{0};

// Below this many items the thread start-up cost dominates.
constexpr std::size_t kMinChunk = 256;

unsigned worker_count(std::size_t n) {
  unsigned t = threads();
  std::size_t useful = (n + kMinChunk - 1) / kMinChunk;
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(t, useful)));
}

}  // namespace

void set_threads(unsigned n) { g_threads = n; }

unsigned threads() {
  unsigned n = g_threads;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::optional<std::size_t> find_first(
    std::size_t n, const std::function<bool(std::size_t)>& pred) {
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (pred(i)) return i;
    }
    return std::nullopt;
  }
  std::atomic<std::size_t> best{n};
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      for (std::size_t i = begin; i < end && i < best.load(); ++i) {
        if (pred(i)) {
          std::size_t cur = best.load();
          while (i < cur && !best.compare_exchange_weak(cur, i)) {
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (best.load() == n) return std::nullopt;
  return best.load();
}

}  // namespace setreg::parallel
