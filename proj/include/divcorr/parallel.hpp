#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace divcorr {

/// Worker count from an explicit request, else DIVCORR_THREADS (ignored unless
/// a positive integer), else the number of logical cores.
unsigned resolve_threads(unsigned requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out dynamically, so body must write only to slot i of its output.
/// The first exception thrown by any worker is rethrown after all join.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += (sum_ >= 0 ? sum_ : -sum_) >= (v >= 0 ? v : -v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace divcorr
