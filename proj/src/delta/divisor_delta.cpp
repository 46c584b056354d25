#include "divcorr/divisor_delta.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace divcorr {

u64 isqrt(u64 x) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(x)));
  while (r > 0 && r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r;
}

TauSegment tau_segment(u64 lo, u64 hi, const SieveLimits& limits) {
  if (lo < 1 || lo > hi) throw std::invalid_argument("tau_segment: need 1 <= lo <= hi");
  if (hi > limits.max_value) {
    throw std::invalid_argument("tau_segment: hi=" + std::to_string(hi) + " exceeds the configured cap " +
                                std::to_string(limits.max_value));
  }
  if (hi > kTauStorageCap) throw std::invalid_argument("tau_segment: 16-bit tau storage supports n <= 1e17");
  const u64 len = hi - lo + 1;
  if (len > limits.max_bytes / sizeof(std::uint16_t)) {
    throw SieveBudgetError("tau_segment: " + std::to_string(len) + " entries exceed the memory budget of " +
                           std::to_string(limits.max_bytes) + " bytes; use smaller segments");
  }
  TauSegment seg;
  seg.base = lo;
  seg.values.assign(len, 0);
  auto* v = seg.values.data();
  const u64 root = isqrt(hi);
  for (u64 d = 1; d <= root; ++d) {
    const u64 sq = d * d;
    u64 n = std::max(lo, sq);
    n = (n + d - 1) / d * d;
    if (n == sq) {
      v[n - lo] += 1;
      n += d;
    }
    for (; n <= hi; n += d) v[n - lo] += 2;
  }
  return seg;
}

u64 divisor_summatory(u64 x) {
  if (x > kTauStorageCap) throw std::invalid_argument("divisor_summatory: x must be <= 1e17");
  if (x == 0) return 0;
  const u64 r = isqrt(x);
  u64 s = 0;
  for (u64 n = 1; n <= r; ++n) s += x / n;
  return 2 * s - r * r;
}

double delta(double x) {
  if (!(x >= 1.0)) throw std::domain_error("delta: x must be >= 1");
  const u64 n = static_cast<u64>(std::floor(x));
  return delta_from(divisor_summatory(n), x);
}

double voronoi_delta(double x, u64 N, const TauSegment& tau_table) {
  if (!(x >= 1.0)) throw std::domain_error("voronoi_delta: x must be >= 1");
  if (N == 0) return 0.0;
  if (tau_table.base != 1 || tau_table.last() < N) {
    throw std::invalid_argument("voronoi_delta: tau table must cover [1, N]");
  }
  const double four_pi = 4.0 * std::numbers::pi;
  const double sx = std::sqrt(x);
  double sum = 0.0, comp = 0.0;
  for (u64 n = 1; n <= N; ++n) {
    const double nd = static_cast<double>(n);
    const double term =
        tau_table[n] * std::pow(nd, -0.75) * std::cos(four_pi * std::sqrt(nd) * sx - std::numbers::pi / 4);
    // Neumaier summation.
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return std::pow(x, 0.25) / (std::numbers::pi * std::numbers::sqrt2) * (sum + comp);
}

double voronoi_delta(double x, u64 N) {
  if (N == 0) {
    if (!(x >= 1.0)) throw std::domain_error("voronoi_delta: x must be >= 1");
    return 0.0;
  }
  return voronoi_delta(x, N, tau_segment(1, N));
}

DeltaContext::DeltaContext(u64 cache_limit) {
  prefix_.assign(cache_limit + 1, 0);
  u64 acc = 0;
  for (u64 lo = 1; lo <= cache_limit; lo += kDefaultSegmentLength) {
    const u64 hi = std::min<u64>(cache_limit, lo + kDefaultSegmentLength - 1);
    const auto seg = tau_segment(lo, hi);
    for (u64 n = lo; n <= hi; ++n) prefix_[n] = (acc += seg[n]);
  }
}

u64 DeltaContext::D(u64 x) const {
  if (x < prefix_.size()) return prefix_[x];
  return divisor_summatory(x);
}

double DeltaContext::delta(double x) const {
  if (!(x >= 1.0)) throw std::domain_error("delta: x must be >= 1");
  return delta_from(D(static_cast<u64>(std::floor(x))), x);
}

}  // namespace divcorr
