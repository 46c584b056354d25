#include "divcorr/special_values.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "divcorr/divisor_delta.hpp"

namespace divcorr {

namespace {

// B_{2k} for k = 1..10.
constexpr double kBernoulli[] = {1.0 / 6,         -1.0 / 30,     1.0 / 42,      -1.0 / 30,
                                 5.0 / 66,        -691.0 / 2730, 7.0 / 6,       -3617.0 / 510,
                                 43867.0 / 798,   -174611.0 / 330};

void require_prime(u64 p, const char* what) {
  if (!is_prime(p)) throw std::invalid_argument(std::string(what) + ": p=" + std::to_string(p) + " is not prime");
}

// prod_{p^k || n} (1 + p^{-s})^{-1} (1 - (k-1)/(k+1) p^{-s})
double local_product(u64 n, double s) {
  double r = 1.0;
  for (const auto& pp : factorize(n)) {
    const double ps = std::pow(static_cast<double>(pp.prime), -s);
    const double k = pp.exponent;
    r *= (1.0 - (k - 1.0) / (k + 1.0) * ps) / (1.0 + ps);
  }
  return r;
}

}  // namespace

double zeta(double s, const ZetaContext& ctx) {
  if (!(s > 1.0 + 1e-6)) throw std::domain_error("zeta: s must exceed 1 + 1e-6");
  if (ctx.correction_terms > 10) throw std::invalid_argument("zeta: at most 10 correction terms");
  const double N = ctx.direct_terms;
  double sum = 0.0;
  // Small terms first.
  for (unsigned n = ctx.direct_terms - 1; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
  const double Ns = std::pow(N, -s);
  double tail = N * Ns / (s - 1.0) + 0.5 * Ns;
  // sum_k B_{2k}/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
  double rising = s;           // s(s+1)...(s+2k-2)
  double fact = 2.0;           // (2k)!
  double npow = Ns / N;        // N^{-s-2k+1}
  for (unsigned k = 1; k <= ctx.correction_terms; ++k) {
    tail += kBernoulli[k - 1] / fact * rising * npow;
    rising *= (s + 2 * k - 1) * (s + 2 * k);
    fact *= (2.0 * k + 1) * (2.0 * k + 2);
    npow /= N * N;
  }
  return sum + tail;
}

double tau_correlation_sum(u64 c, u64 d, double s) {
  if (c == 0 || d == 0) throw std::invalid_argument("tau_correlation_sum: c, d must be positive");
  if (gcd(c, d) != 1) {
    throw std::invalid_argument("tau_correlation_sum: gcd(c, d) must be 1 (got c=" + std::to_string(c) +
                                ", d=" + std::to_string(d) + ")");
  }
  const u64 cd = c * d;
  const double z = zeta(s);
  return static_cast<double>(tau(cd)) * std::pow(z, 4) / zeta(2 * s) * local_product(cd, s);
}

double tau_correlation_partial(u64 c, u64 d, double s, u64 N) {
  if (N < 1) throw std::invalid_argument("tau_correlation_partial: N must be >= 1");
  if (c == 0 || d == 0) throw std::invalid_argument("tau_correlation_partial: c, d must be positive");
  const TauSegment base = tau_segment(1, N, SieveLimits{N, std::size_t{1} << 33});
  const Factorization fc = factorize(c), fd = factorize(d);
  // tau(mn) = tau(n) prod_{p^a || m} (a + v_p(n) + 1) / (v_p(n) + 1)
  auto tau_times = [&](const Factorization& fm, u64 n) {
    double t = base[n];
    for (const auto& pp : fm) {
      const unsigned v = valuation(n, pp.prime);
      t = t / (v + 1) * (pp.exponent + v + 1);
    }
    return t;
  };
  // Positive terms, smallest first, with Neumaier compensation.
  double sum = 0.0, comp = 0.0;
  for (u64 n = N; n >= 1; --n) {
    const double term = tau_times(fc, n) * tau_times(fd, n) * std::pow(static_cast<double>(n), -s);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  sum += comp;
  return sum;
}

double tong_constant() {
  return std::pow(zeta(1.5), 4) / (6.0 * std::numbers::pi * std::numbers::pi * zeta(3.0));
}

CorrelationConstant correlation_limit(u64 a, u64 b) {
  if (a == 0 || b == 0) throw std::invalid_argument("correlation_limit: a, b must be positive");
  CorrelationConstant out;
  out.a = a;
  out.b = b;
  out.lambda = gcd(a, b);
  out.c = a / out.lambda;
  out.d = b / out.lambda;
  const double cd = static_cast<double>(out.c) * static_cast<double>(out.d);
  out.value = tau_correlation_sum(out.c, out.d, 1.5) /
              (6.0 * std::numbers::pi * std::numbers::pi * std::sqrt(static_cast<double>(out.lambda)) * cd);
  return out;
}

double beta(u64 p) {
  require_prime(p, "beta");
  const double q = std::pow(static_cast<double>(p), -1.5);
  return (1.0 - q) / (1.0 + q);
}

double phi(u64 p, unsigned k) {
  require_prime(p, "phi");
  return (k * beta(p) + 1.0) / std::pow(static_cast<double>(p), static_cast<double>(k));
}

double phi_star(u64 p, unsigned k) {
  require_prime(p, "phi_star");
  return (k * beta(p) + 1.0) / std::pow(static_cast<double>(p), 0.75 * k);
}

SecondMomentLimit second_moment_limit(const CoefficientVector& g) {
  std::complex<double> acc = 0.0;
  for (const auto& [n, gn] : g.values) {
    if (gn.is_zero()) continue;
    for (const auto& [m, gm] : g.values) {
      if (gm.is_zero()) continue;
      acc += gn.to_complex() * std::conj(gm.to_complex()) * correlation_limit(n, m).value;
    }
  }
  SecondMomentLimit out{acc.real(), acc.imag()};
  if (std::abs(out.imaginary_part) >= 1e-10) {
    throw std::logic_error("second_moment_limit: imaginary part " + std::to_string(out.imaginary_part) +
                           " is not negligible; the form must be Hermitian");
  }
  if (!(out.value > 0.0)) {
    throw std::logic_error("second_moment_limit: non-positive value " + std::to_string(out.value) +
                           " (the limit is strictly positive for valid inputs)");
  }
  return out;
}

SecondMomentLimit second_moment_limit(const PeriodicMF& f1, const PeriodicMF& f2) {
  return second_moment_limit(g_coefficients(f1, f2));
}

}  // namespace divcorr
