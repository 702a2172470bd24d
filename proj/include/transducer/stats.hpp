#pragma once

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace transducer {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Mean and spread of a sample, using compensated sums of x and x^2 about a
// fixed shift so that merging partial results is exact up to rounding.
struct MomentSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double stderr_mean = 0.0;
};

MomentSummary summarize(const std::vector<double>& values);

// Worker count from TRANSDUCER_THREADS (default 1, capped at hardware).
unsigned worker_count();

// Runs body(begin, end) over [0, n) split into contiguous blocks. Callers
// write into per-index slots so the result is independent of scheduling.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace transducer
