#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "divcorr/divisor_delta.hpp"
#include "divcorr/moments.hpp"
#include "divcorr/parallel.hpp"

namespace divcorr {

namespace {

template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    for (std::size_t i = 0; i < N; ++i) {
      long double x = std::cos(3.14159265358979323846264338327950288L * (i + 0.75L) / (N + 0.5L));
      long double dp = 0;
      for (int it = 0; it < 100; ++it) {
        long double p0 = 1, p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const long double p2 = ((2.0L * k - 1) * x * p1 - (k - 1.0L) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (x * p1 - p0) / (x * x - 1);
        const long double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-21L) break;
      }
      {
        long double p0 = 1, p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const long double p2 = ((2.0L * k - 1) * x * p1 - (k - 1.0L) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (x * p1 - p0) / (x * x - 1);
      }
      nodes[i] = static_cast<double>(x);
      weights[i] = static_cast<double>(2.0L / ((1 - x * x) * dp * dp));
    }
  }
};

const GaussLegendre<6>& rule_short() {
  static const GaussLegendre<6> r;
  return r;
}

const GaussLegendre<16>& rule_near_origin() {
  static const GaussLegendre<16> r;
  return r;
}

inline double delta_value(u64 d, double u) { return static_cast<double>(d) - u * (std::log(u) + kTwoGammaMinusOne); }

// Integral of Delta(s1 x) Delta(s2 x) over [x0, x1] with fixed D values.
// The integrand is analytic on a disc around the interval that reaches to the
// singularity at 0; 6 nodes suffice (error ~ rho^-12, rho >= 17) once x0 >= 4 (x1 - x0).
template <std::size_t N>
double interval_integral(const GaussLegendre<N>& rule, const Scale& s1, const Scale& s2, bool same, u64 d1, u64 d2,
                         double x0, double x1) {
  const double mid = 0.5 * (x0 + x1);
  const double half = 0.5 * (x1 - x0);
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double x = mid + half * rule.nodes[i];
    const double v1 = delta_value(d1, s1.u(x));
    const double v2 = same ? v1 : delta_value(d2, s2.u(x));
    acc += rule.weights[i] * (v1 * v2);
  }
  return acc * half;
}

double chunk_length_for(const Scale& s1, const Scale& s2, const IntegrationOptions& opts) {
  if (opts.chunk_length > 0) return opts.chunk_length;
  double f = 1.0;
  for (const Scale* s : {&s1, &s2}) {
    if (!s->is_integer()) f = std::max(f, s->factor());
  }
  return std::max(1.0, static_cast<double>(1u << 20) / f);
}

// One contiguous piece [lo, hi] integrated from freshly seeded D values.
double integrate_chunk(const Scale& s1, const Scale& s2, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const bool same = s1 == s2;
  u64 m1 = s1.jumps_up_to(lo);
  u64 m2 = same ? m1 : s2.jumps_up_to(lo);
  u64 d1 = divisor_summatory(m1);
  u64 d2 = same ? d1 : divisor_summatory(m2);
  const u64 e1 = s1.jumps_up_to(hi);
  const u64 e2 = same ? e1 : s2.jumps_up_to(hi);
  TauSegment t1, t2;
  if (e1 > m1) t1 = tau_segment(m1 + 1, e1);
  if (!same && e2 > m2) t2 = tau_segment(m2 + 1, e2);

  CompensatedSum acc;
  auto piece = [&](double x0, double x1) {
    if (m1 == 0 || m2 == 0 || !(x1 > x0)) return;
    const double len = x1 - x0;
    if (x0 >= 4.0 * len) {
      acc.add(interval_integral(rule_short(), s1, s2, same, d1, d2, x0, x1));
    } else {
      acc.add(interval_integral(rule_near_origin(), s1, s2, same, d1, d2, x0, x1));
    }
  };

  BreakpointStream stream(s1, s2, lo, hi);
  double x = lo;
  while (auto ev = stream.next()) {
    piece(x, ev->x);
    x = ev->x;
    if (same) {
      ++m1;
      d1 += t1[m1];
      m2 = m1;
      d2 = d1;
      continue;
    }
    if (ev->first) d1 += t1[++m1];
    if (ev->second) d2 += t2[++m2];
  }
  piece(x, hi);
  return acc.value();
}

std::vector<double> chunk_boundaries(double lo, double hi, double chunk, const std::vector<double>& extra) {
  std::vector<double> b{lo, hi};
  for (double k = std::floor(lo / chunk) + 1;; k += 1) {
    const double v = k * chunk;
    if (v >= hi) break;
    if (v > lo) b.push_back(v);
  }
  for (double v : extra)
    if (v > lo && v < hi) b.push_back(v);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

std::vector<double> integrate_chunks(const Scale& s1, const Scale& s2, const std::vector<double>& bounds,
                                     const IntegrationOptions& opts) {
  const std::size_t n = bounds.size() - 1;
  std::vector<double> parts(n, 0.0);
  std::atomic<std::size_t> done{0};
  parallel_for(n, std::max(1u, opts.threads), [&](std::size_t i) {
    parts[i] = integrate_chunk(s1, s2, bounds[i], bounds[i + 1]);
    const std::size_t d = ++done;
    if (opts.progress) opts.progress(static_cast<double>(d) / n);
  });
  return parts;
}

void check_range(double lo, double hi, const IntegrationOptions& opts) {
  if (!(lo >= 1.0)) throw std::invalid_argument("integration range must start at x >= 1");
  if (!(hi >= lo)) throw std::invalid_argument("integration range is empty or reversed");
  if (hi > opts.max_X) {
    throw std::invalid_argument("X=" + std::to_string(hi) + " exceeds the configured maximum " +
                                std::to_string(opts.max_X));
  }
}

}  // namespace

Scale Scale::divide_by(u64 a) {
  if (a == 0) throw std::invalid_argument("Scale: divisor must be positive");
  Scale s;
  s.integer_ = true;
  s.a_ = a;
  s.theta_ = 1.0 / static_cast<double>(a);
  return s;
}

Scale Scale::multiply_by(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("Scale: theta must be positive and finite");
  Scale s;
  s.integer_ = false;
  s.a_ = 0;
  s.theta_ = theta;
  return s;
}

u64 Scale::jumps_up_to(double x) const {
  if (!(x >= 0.0)) return 0;
  const double est = std::floor(integer_ ? x / static_cast<double>(a_) : theta_ * x);
  u64 m = est > 0 ? static_cast<u64>(est) : 0;
  while (breakpoint(m + 1) <= x) ++m;
  while (m > 0 && breakpoint(m) > x) --m;
  return m;
}

BreakpointStream::BreakpointStream(const Scale& s1, const Scale& s2, double lo, double hi)
    : s1_(s1), s2_(s2), hi_(hi), m1_(s1.jumps_up_to(lo) + 1), m2_(s2.jumps_up_to(lo) + 1) {
  n1_ = s1_.breakpoint(m1_);
  n2_ = s2_.breakpoint(m2_);
}

std::optional<BreakpointStream::Event> BreakpointStream::next() {
  const double x = std::min(n1_, n2_);
  if (!(x < hi_)) return std::nullopt;
  Event ev{x, n1_ == x, n2_ == x};
  if (ev.first) n1_ = s1_.breakpoint(++m1_);
  if (ev.second) n2_ = s2_.breakpoint(++m2_);
  return ev;
}

double integrate_product(const Scale& s1, const Scale& s2, double lo, double hi, const IntegrationOptions& opts) {
  check_range(lo, hi, opts);
  if (hi == lo) return 0.0;
  const auto bounds = chunk_boundaries(lo, hi, chunk_length_for(s1, s2, opts), {});
  const auto parts = integrate_chunks(s1, s2, bounds, opts);
  CompensatedSum total;
  for (double p : parts) total.add(p);
  return total.value();
}

std::vector<double> integrate_product_on_grid(const Scale& s1, const Scale& s2, const std::vector<double>& grid,
                                              const IntegrationOptions& opts) {
  if (grid.empty()) return {};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  }
  check_range(1.0, grid.back(), opts);
  if (!(grid.front() >= 1.0)) throw std::invalid_argument("grid points must be >= 1");
  const auto bounds = chunk_boundaries(1.0, grid.back(), chunk_length_for(s1, s2, opts), grid);
  const auto parts = integrate_chunks(s1, s2, bounds, opts);
  std::vector<double> out;
  out.reserve(grid.size());
  CompensatedSum running;
  std::size_t g = 0;
  while (g < grid.size() && grid[g] <= bounds[0]) {
    out.push_back(0.0);
    ++g;
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    running.add(parts[i]);
    while (g < grid.size() && grid[g] == bounds[i + 1]) {
      out.push_back(running.value());
      ++g;
    }
  }
  return out;
}

}  // namespace divcorr
