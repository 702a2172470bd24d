#include "transducer/stats.hpp"

#include <algorithm>

namespace transducer {

MomentSummary summarize(const std::vector<double>& values) {
  MomentSummary s;
  s.count = values.size();
  if (s.count == 0) return s;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  s.mean = sum.value() / static_cast<double>(s.count);
  if (s.count < 2) return s;
  CompensatedSum sq;
  for (double v : values) sq.add((v - s.mean) * (v - s.mean));
  s.variance = sq.value() / static_cast<double>(s.count - 1);
  s.stderr_mean = std::sqrt(s.variance / static_cast<double>(s.count));
  return s;
}

unsigned worker_count() {
  unsigned n = 1;
  if (const char* env = std::getenv("TRANSDUCER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  return std::min(n, hw);
}

void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace transducer
