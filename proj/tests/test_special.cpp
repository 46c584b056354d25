#include <doctest.h>

#include <cmath>

#include "divcorr/acceptance.hpp"
#include "divcorr/special_values.hpp"

using namespace divcorr;

namespace {

const double kPi = 3.14159265358979323846;

// Direct sum to N plus the first two Euler-Maclaurin tail terms.
double zeta_direct(double s, int N = 200000) {
  long double acc = 0;
  for (int n = N; n >= 1; --n) acc += std::pow(static_cast<long double>(n), -static_cast<long double>(s));
  const long double Nn = N;
  return static_cast<double>(acc + std::pow(Nn, 1 - static_cast<long double>(s)) / (s - 1) -
                             0.5L * std::pow(Nn, -static_cast<long double>(s)));
}

}  // namespace

TEST_CASE("zeta against known values and direct summation") {
  CHECK(zeta(2.0) == doctest::Approx(kPi * kPi / 6).epsilon(1e-15));
  CHECK(zeta(4.0) == doctest::Approx(std::pow(kPi, 4) / 90).epsilon(1e-15));
  CHECK(zeta(3.0) == doctest::Approx(1.2020569031595942).epsilon(1e-15));
  for (double s : {1.1, 1.5, 2.5, 3.0, 7.0}) CHECK(zeta(s) == doctest::Approx(zeta_direct(s)).epsilon(1e-10));
  CHECK_THROWS_AS(zeta(1.0), std::domain_error);
  CHECK_THROWS_AS(zeta(0.5), std::domain_error);
}

TEST_CASE("Tong's constant") {
  const double z = zeta_direct(1.5);
  CHECK(tong_constant() == doctest::Approx(std::pow(z, 4) / (6 * kPi * kPi * zeta_direct(3.0))).epsilon(1e-10));
  CHECK(tong_constant() == doctest::Approx(0.6543).epsilon(1e-4));
}

TEST_CASE("tau correlation closed form against partial sums with a fitted tail") {
  for (auto [c, d] : std::vector<std::pair<u64, u64>>{{1, 1}, {2, 3}, {4, 9}, {1, 7}}) {
    const double closed = tau_correlation_sum(c, d, 1.5);
    const auto t = tau_correlation_tail(c, d, 1.5, 200000);
    CHECK(tau_correlation_partial(c, d, 1.5, 200000) == doctest::Approx(t.partial).epsilon(1e-12));
    CHECK(closed == doctest::Approx(t.partial + t.tail).epsilon(1e-4));
    CHECK(t.partial < closed);
  }
  CHECK_THROWS(tau_correlation_sum(2, 4, 1.5));
}

TEST_CASE("tau correlation at s = 2 converges fast enough for a plain partial sum") {
  // Tail of sum tau(n)^2 n^{-2} past 1e6 is below 1e-4 relative.
  const double closed = tau_correlation_sum(1, 1, 2.0);
  CHECK(closed == doctest::Approx(std::pow(kPi * kPi / 6, 4) / (std::pow(kPi, 4) / 90)).epsilon(1e-12));
  CHECK(tau_correlation_partial(1, 1, 2.0, 1000000) == doctest::Approx(closed).epsilon(1e-4));
}

TEST_CASE("correlation limits") {
  CHECK(correlation_limit(1, 1).value == doctest::Approx(tong_constant()).epsilon(1e-15));
  CHECK(correlation_limit(1, 2).value == doctest::Approx(0.4834).epsilon(1e-4));
  CHECK(correlation_limit(2, 3).value == correlation_limit(3, 2).value);
  // Substituting x = 2t in the integral of Delta(x/2) Delta(x/4) gives c_{2,4} = c_{1,2} / sqrt 2.
  CHECK(correlation_limit(2, 4).value == doctest::Approx(correlation_limit(1, 2).value / std::sqrt(2.0)).epsilon(1e-14));
  const auto c = correlation_limit(6, 4);
  CHECK(c.lambda == 2);
  CHECK(c.c * c.d == 6);
  CHECK_THROWS(correlation_limit(0, 1));
}

TEST_CASE("local functions beta, phi, phi*") {
  for (u64 p : {2, 3, 5, 7}) {
    const double q = std::pow(static_cast<double>(p), -1.5);
    CHECK(beta(p) == doctest::Approx((1 - q) / (1 + q)));
    CHECK(phi(p, 0) == doctest::Approx(1.0));
    CHECK(phi(p, 2) == doctest::Approx((2 * beta(p) + 1) / (p * p)));
    CHECK(phi_star(p, 3) == doctest::Approx(std::pow(static_cast<double>(p), 0.75) * phi(p, 3)));
  }
  CHECK_THROWS(beta(4));
  CHECK_THROWS(phi(6, 1));
}

TEST_CASE("second moment limits") {
  const PeriodicMF p = parity_function();
  const auto lim = second_moment_limit(p, p);
  CHECK(lim.value > 0);
  CHECK(std::fabs(lim.imaginary_part) < 1e-12);
  // g = {1: 1, 2: -4, 4: 4}: sum g(n) g(m) c_{n,m} written out.
  const u64 idx[3] = {1, 2, 4};
  const double g[3] = {1, -4, 4};
  double direct = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) direct += g[i] * g[j] * correlation_limit(idx[i], idx[j]).value;
  CHECK(lim.value == doctest::Approx(direct).epsilon(1e-13));
  const PeriodicMF t = prime_periodic_function(3);
  CHECK(second_moment_limit(p, t).value > 0);
  CHECK(second_moment_limit(t, t).value > 0);
}
