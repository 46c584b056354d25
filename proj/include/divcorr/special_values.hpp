#pragma once

// Closed-form constants: zeta, the Euler product for sum tau(cn) tau(dn) n^{-s},
// the correlation limits c_{a,b}, the local functions phi, phi*, beta, and the
// second-moment limit attached to a pair of periodic multiplicative functions.

#include <complex>

#include "divcorr/arith.hpp"
#include "divcorr/periodic_mf.hpp"

namespace divcorr {

/// Euler-Maclaurin parameters; fixed so results are reproducible per build.
struct ZetaContext {
  unsigned direct_terms = 50;      // sum n^{-s} for n < direct_terms
  unsigned correction_terms = 10;  // Bernoulli corrections B_2 .. B_20
};

/// zeta(s) for real s > 1 + 1e-6; throws std::domain_error otherwise.
double zeta(double s, const ZetaContext& ctx = {});

/// Closed form of sum_{n>=1} tau(cn) tau(dn) / n^s for coprime c, d:
///   tau(cd) zeta(s)^4 / zeta(2s) prod_{p^k || cd} (1 + p^{-s})^{-1} (1 - (k-1)/(k+1) p^{-s}).
double tau_correlation_sum(u64 c, u64 d, double s);

/// Direct partial sum sum_{n<=N} tau(cn) tau(dn) / n^s (brute-force oracle).
double tau_correlation_partial(u64 c, u64 d, double s, u64 N);

/// Tong's constant zeta(3/2)^4 / (6 pi^2 zeta(3)).
double tong_constant();

struct CorrelationConstant {
  u64 a = 1, b = 1;
  u64 lambda = 1;  // gcd(a, b)
  u64 c = 1, d = 1;
  double value = 0;
};

/// lim X^{-3/2} int_1^X Delta(x/a) Delta(x/b) dx
///   = tau(cd) / (6 pi^2 sqrt(lambda) cd) * zeta(3/2)^4/zeta(3)
///     * prod_{p^k || cd} (1 - (k-1)/((k+1) p^{3/2})) / (1 + p^{-3/2}).
CorrelationConstant correlation_limit(u64 a, u64 b);

/// beta(p) = (1 - p^{-3/2}) / (1 + p^{-3/2}).
double beta(u64 p);
/// phi(p^k) = (k beta(p) + 1) / p^k.
double phi(u64 p, unsigned k);
/// phi*(p^k) = p^{k/4} phi(p^k) = (k beta(p) + 1) / p^{3k/4}.
double phi_star(u64 p, unsigned k);

struct SecondMomentLimit {
  double value = 0;           // real part of the bilinear form
  double imaginary_part = 0;  // discarded after the |im| < 1e-10 check
};

/// sum_{n,m | M1 M2} g(n) conj(g(m)) c_{n,m}. Throws std::logic_error when
/// the value is not strictly positive or the imaginary part is not negligible.
SecondMomentLimit second_moment_limit(const PeriodicMF& f1, const PeriodicMF& f2);
SecondMomentLimit second_moment_limit(const CoefficientVector& g);

}  // namespace divcorr
