#pragma once

// Divisor summatory function D(x) = sum_{n<=x} tau(n) and the error term
//   Delta(x) = D(x) - x log x - (2 gamma - 1) x.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "divcorr/arith.hpp"

namespace divcorr {

/// Euler-Mascheroni constant, fixed at 16 significant digits.
inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kTwoGammaMinusOne = 2.0 * kEulerGamma - 1.0;

struct SieveLimits {
  u64 max_value = 1000000000ULL;           // largest n a segment may reach
  std::size_t max_bytes = std::size_t{256} << 20;  // memory budget per segment
};

/// Largest n for which tau(n) still fits the 16-bit segment storage.
inline constexpr u64 kTauStorageCap = 100000000000000000ULL;  // 1e17

class SieveBudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// tau(base), tau(base+1), ... over a contiguous range.
struct TauSegment {
  u64 base = 1;
  std::vector<std::uint16_t> values;

  u64 last() const { return base + values.size() - 1; }
  unsigned operator[](u64 n) const { return values[n - base]; }
};

/// Default streaming segment length.
inline constexpr std::size_t kDefaultSegmentLength = std::size_t{1} << 20;

/// Sieves divisor pairs (d, n/d) with d <= sqrt(hi), counting each pair
/// twice unless d^2 = n. Requires 1 <= lo <= hi <= limits.max_value.
TauSegment tau_segment(u64 lo, u64 hi, const SieveLimits& limits = {});

/// Exact D(x) by the hyperbola identity 2 sum_{n<=sqrt x} floor(x/n) - floor(sqrt x)^2.
/// Valid for x <= 1e17 (result below 2^64).
u64 divisor_summatory(u64 x);

u64 isqrt(u64 x);

/// Delta(x) for x >= 1; throws std::domain_error otherwise.
double delta(double x);

/// Delta(y) evaluated from a known D = D(floor(y)); y >= 1.
inline double delta_from(u64 d_floor, double y) {
  return static_cast<double>(d_floor) - y * (std::log(y) + kTwoGammaMinusOne);
}

/// Truncated Voronoi series
///   U_N(x) = x^{1/4}/(pi sqrt 2) sum_{n<=N} tau(n) n^{-3/4} cos(4 pi sqrt(n x) - pi/4).
/// The series converges to the midpoint-normalized error term
/// Delta(x) - tau(x)[x integer]/2 - 1/4; the remainder after N terms is
/// O(x^eps + x^{1/2+eps} N^{-1/2}) with unspecified constants.
double voronoi_delta(double x, u64 N);

/// Same, reusing a precomputed tau table (tau[n] for 1 <= n <= N).
double voronoi_delta(double x, u64 N, const TauSegment& tau_table);

/// Holds gamma and an optional prefix table of D for repeated evaluations.
class DeltaContext {
 public:
  DeltaContext() = default;
  /// Precomputes D(n) for n <= cache_limit.
  explicit DeltaContext(u64 cache_limit);

  double gamma() const { return kEulerGamma; }
  u64 D(u64 x) const;
  double delta(double x) const;

 private:
  std::vector<u64> prefix_;  // prefix_[n] = D(n)
};

}  // namespace divcorr
