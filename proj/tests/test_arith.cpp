#include <doctest.h>

#include <random>

#include "divcorr/arith.hpp"
#include "divcorr/exact.hpp"

using namespace divcorr;

namespace {

u64 brute_tau(u64 n) {
  u64 c = 0;
  for (u64 d = 1; d <= n; ++d) c += n % d == 0;
  return c;
}

int brute_mu(u64 n) {
  int sign = 1;
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    sign = -sign;
  }
  return n > 1 ? -sign : sign;
}

}  // namespace

TEST_CASE("factorize reproduces n and yields primes") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const u64 n = rng() >> (1 + i % 40);
    if (n == 0) continue;
    u64 prod = 1;
    u64 prev = 0;
    for (const auto& pp : factorize(n)) {
      CHECK(pp.prime > prev);
      prev = pp.prime;
      for (u64 d = 2; d * d <= pp.prime && d < 100000; ++d) CHECK(pp.prime % d != 0);
      prod *= ipow(pp.prime, pp.exponent);
    }
    CHECK(prod == n);
  }
  CHECK(factorize(1).empty());
  CHECK_THROWS(factorize(0));
}

TEST_CASE("factorize handles semiprimes with large factors") {
  const u64 p = 1000000007ULL, q = 998244353ULL;
  const auto f = factorize(p * q);
  REQUIRE(f.size() == 2);
  CHECK(f[0].prime == q);
  CHECK(f[1].prime == p);
  CHECK(is_prime(2305843009213693951ULL));
  CHECK_FALSE(is_prime(3215031751ULL));
}

TEST_CASE("tau and mu agree with direct counting") {
  for (u64 n = 1; n <= 2000; ++n) {
    CHECK(tau(n) == brute_tau(n));
    CHECK(mu(n) == brute_mu(n));
  }
}

TEST_CASE("divisors are sorted and complete") {
  const auto d = divisors(360);
  CHECK(d.size() == 24);
  CHECK(std::is_sorted(d.begin(), d.end()));
  for (u64 x : d) CHECK(360 % x == 0);
  CHECK(divisors(1) == std::vector<u64>{1});
}

TEST_CASE("gcd, lcm, ipow, valuation") {
  CHECK(gcd(12, 18) == 6);
  CHECK(gcd(0, 5) == 5);
  CHECK(lcm(4, 6) == 12);
  CHECK_THROWS_AS(lcm(u64{1} << 40, (u64{1} << 40) - 1), std::overflow_error);
  CHECK(ipow(3, 4) == 81);
  CHECK_THROWS_AS(ipow(10, 20), std::overflow_error);
  CHECK(valuation(48, 2) == 4);
  CHECK(valuation(49, 2) == 0);
}

TEST_CASE("exact scalars") {
  const ExactScalar a(mpq_class(1, 2), mpq_class(1, 3));
  const ExactScalar b(mpq_class(-2), mpq_class(1));
  const ExactScalar p = a * b;
  CHECK(p.re() == mpq_class(-4, 3));
  CHECK(p.im() == mpq_class(-1, 6));
  CHECK((p / b) == a);
  CHECK(a.conj().im() == mpq_class(-1, 3));
  CHECK(a.norm() == mpq_class(13, 36));
  CHECK_THROWS(a / ExactScalar(0));
}

TEST_CASE("rational parsing") {
  CHECK(parse_rational("-3/6") == mpq_class(-1, 2));
  CHECK(parse_rational("7") == 7);
  CHECK(parse_rational("010") == 10);
  CHECK_THROWS_AS(parse_rational("0.5"), std::invalid_argument);
  CHECK(parse_rational("0.25", true) == mpq_class(1, 4));
  CHECK(parse_rational("-0.5e1", true) == -5);
  CHECK_THROWS(parse_rational("1/0"));
  CHECK_THROWS(parse_rational("abc"));
  CHECK(rational_to_string(mpq_class(4)) == "4/1");
}
