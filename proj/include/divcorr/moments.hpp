#pragma once

// Normalized moment integrals X^{-3/2} int_1^X (...) dx of products of
// divisor error terms, and the exact second moment of partial sums of f1*f2.
//
// Both Delta factors are step-plus-smooth: between consecutive breakpoints
// the integer parts D(floor u) are constant and the integrand is analytic, so
// each interval is integrated by a fixed Gauss-Legendre rule whose order is
// chosen from the distance to the logarithmic singularity at x = 0. The
// rule is exact to rounding for these integrands; see integrate_product.
//
// Delta(y) is taken as 0 for y < 1 throughout.

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divcorr/arith.hpp"
#include "divcorr/periodic_mf.hpp"

namespace divcorr {

/// Argument map x -> u for one Delta factor: u = x / a (integer a) or
/// u = theta x (real theta, taken as represented in binary64).
class Scale {
 public:
  static Scale divide_by(u64 a);
  static Scale multiply_by(double theta);

  bool is_integer() const { return integer_; }
  u64 divisor() const { return a_; }
  double factor() const { return theta_; }

  double u(double x) const { return integer_ ? x / static_cast<double>(a_) : theta_ * x; }
  /// x-position of the m-th jump of D(floor u): m a, or m / theta.
  double breakpoint(u64 m) const {
    return integer_ ? static_cast<double>(m) * static_cast<double>(a_) : static_cast<double>(m) / theta_;
  }
  /// #{m >= 1 : breakpoint(m) <= x}, consistent with breakpoint() rounding.
  u64 jumps_up_to(double x) const;
  /// Largest u-value reached on [1, X] (for sieve sizing).
  double u_extent(double X) const { return u(X); }

  friend bool operator==(const Scale& l, const Scale& r) {
    return l.integer_ == r.integer_ && l.a_ == r.a_ && l.theta_ == r.theta_;
  }

 private:
  bool integer_ = true;
  u64 a_ = 1;
  double theta_ = 1.0;
};

/// Merged, strictly increasing stream of jump positions of two scales in
/// the open interval (lo, hi).
class BreakpointStream {
 public:
  struct Event {
    double x;
    bool first;   // first scale jumps here
    bool second;  // second scale jumps here
  };

  BreakpointStream(const Scale& s1, const Scale& s2, double lo, double hi);
  /// Next event, or nullopt once hi is reached.
  std::optional<Event> next();

 private:
  Scale s1_, s2_;
  double hi_;
  u64 m1_, m2_;  // index of the next jump
  double n1_, n2_;
};

struct IntegrationOptions {
  unsigned threads = 1;
  /// Upper limit accepted for X.
  double max_X = 1e9;
  /// Chunk length in x; 0 selects 2^20 / max(1, scale factor).
  double chunk_length = 0;
  /// Receives completed fraction in [0, 1]; called from worker threads.
  std::function<void(double)> progress;
};

/// int_lo^hi Delta(s1(x)) Delta(s2(x)) dx, lo >= 1.
double integrate_product(const Scale& s1, const Scale& s2, double lo, double hi,
                         const IntegrationOptions& opts = {});

/// Running values of int_1^g Delta(s1(x)) Delta(s2(x)) dx at each grid point.
std::vector<double> integrate_product_on_grid(const Scale& s1, const Scale& s2, const std::vector<double>& grid,
                                              const IntegrationOptions& opts = {});

struct MomentSeries {
  std::string kind;  // "correlation", "theta", "second_moment"
  u64 a = 1;
  std::optional<u64> b;
  std::optional<double> theta;
  std::vector<double> grid;
  std::vector<double> integral;    // int_1^X
  std::vector<double> normalized;  // integral / X^{3/2}
  std::optional<double> limit;
  std::optional<std::vector<double>> relative_error;
  std::optional<double> decay_slope;  // theta mode: slope of log|value| vs log X
  double wall_seconds = 0;
};

/// Grid spec "log:<lo>:<hi>:<points-per-decade>" or "list:<x1>,<x2>,...".
/// Throws std::invalid_argument unless the result is strictly increasing and >= 1.
std::vector<double> parse_grid(std::string_view spec);
/// Decades 10, 100, ... below X, then X itself.
std::vector<double> default_grid(double X);

MomentSeries correlation_integral(u64 a, u64 b, double X, std::vector<double> grid,
                                  const IntegrationOptions& opts = {});

/// theta > 0. When rational = (p, q) is supplied, the limit sqrt(p) c_{p,q}
/// is attached; otherwise the limit is 0 and a decay slope is reported.
MomentSeries theta_correlation(double theta, double X, std::vector<double> grid,
                               std::optional<std::pair<u64, u64>> rational = std::nullopt,
                               const IntegrationOptions& opts = {});

/// Exact route: S(x) = sum_{n<=x} (f1*f2)(n) is constant on [n, n+1); squared
/// magnitudes are summed exactly and converted to double at each grid point.
MomentSeries second_moment_integral(const PeriodicMF& f1, const PeriodicMF& f2, double X,
                                    std::vector<double> grid, const IntegrationOptions& opts = {});

/// Running exact integrals int_1^g |S(x)|^2 dx at each grid point.
std::vector<double> second_moment_running(const PeriodicMF& f1, const PeriodicMF& f2, const std::vector<double>& grid,
                                          const IntegrationOptions& opts = {});

/// Delta-decomposition route for the same integral restricted to [lo, hi]:
/// sum_{a,b | M1M2} g(a) conj(g(b)) int_lo^hi Delta(x/a) Delta(x/b) dx.
double second_moment_via_delta(const PeriodicMF& f1, const PeriodicMF& f2, double lo, double hi,
                               const IntegrationOptions& opts = {});

/// Exact route restricted to [lo, hi].
double second_moment_exact(const PeriodicMF& f1, const PeriodicMF& f2, double lo, double hi);

/// Exact partial sums sum_{n<=x} (f1*f2)(n) for x = 0..n_max, as complex doubles
/// converted from exact scaled integers.
std::vector<std::complex<double>> convolution_partial_sums(const PeriodicMF& f1, const PeriodicMF& f2, u64 n_max);

struct IdentityCheck {
  double max_deviation = 0;
  double worst_x = 0;
};

/// max_x |sum_{n<=x}(f1*f2)(n) - sum_{n | M1M2} g(n) Delta(x/n)| over the samples.
/// Samples must satisfy M1M2 <= x <= 1e8. Throws std::runtime_error naming the
/// worst x when the deviation exceeds 1e-4.
IdentityCheck identity_check(const PeriodicMF& f1, const PeriodicMF& f2, const std::vector<double>& samples);

struct ConvergenceReport {
  double slope = 0;
  std::size_t points_used = 0;
};

/// Least-squares slope of log|value - limit| against log X (limit 0 when
/// absent); residuals below 1e-14 are excluded. Requires >= 4 grid points.
ConvergenceReport convergence_report(const MomentSeries& series);

std::string to_json(const MomentSeries& s, bool include_timing = false, int indent = 2);
std::string to_csv(const MomentSeries& s);

}  // namespace divcorr
