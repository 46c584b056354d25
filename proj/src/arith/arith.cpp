#include "divcorr/arith.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace divcorr {

namespace {

using u128 = unsigned __int128;

constexpr u64 kTrialLimit = 1000000;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

// Deterministic for all 64-bit n with these bases.
bool miller_rabin(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Brent's variant; n is an odd composite with no factor below kTrialLimit.
u64 rho(u64 n) {
  for (u64 c = 1;; ++c) {
    u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
    const u64 m = 128;
    u64 r = 1;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    do {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      u64 k = 0;
      do {
        ys = y;
        for (u64 i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
      } while (k < r && g == 1);
      r <<= 1;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void split(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (miller_rabin(n)) {
    out.push_back(n);
    return;
  }
  const u64 d = rho(n);
  split(d, out);
  split(n / d, out);
}

}  // namespace

bool is_prime(u64 n) { return miller_rabin(n); }

Factorization factorize(u64 n) {
  if (n == 0) throw std::invalid_argument("factorize: n must be positive");
  if (n > kFactorizeCap) throw std::invalid_argument("factorize: n exceeds 2^63-1");
  Factorization out;
  auto take = [&](u64 p) {
    unsigned k = 0;
    while (n % p == 0) {
      n /= p;
      ++k;
    }
    if (k) out.push_back({p, k});
  };
  take(2);
  for (u64 p = 3; p < kTrialLimit && p * p <= n; p += 2) take(p);
  if (n == 1) return out;
  // No factor below kTrialLimit remains, so n < kTrialLimit^2 is prime.
  if (n < kTrialLimit * kTrialLimit || miller_rabin(n)) {
    out.push_back({n, 1});
    return out;
  }
  std::vector<u64> primes;
  split(n, primes);
  std::sort(primes.begin(), primes.end());
  for (std::size_t i = 0; i < primes.size();) {
    std::size_t j = i;
    while (j < primes.size() && primes[j] == primes[i]) ++j;
    out.push_back({primes[i], static_cast<unsigned>(j - i)});
    i = j;
  }
  return out;
}

u64 tau(u64 n) {
  u64 t = 1;
  for (const auto& pp : factorize(n)) t *= pp.exponent + 1;
  return t;
}

int mu(u64 n) {
  int m = 1;
  for (const auto& pp : factorize(n)) {
    if (pp.exponent > 1) return 0;
    m = -m;
  }
  return m;
}

std::vector<u64> divisors(const Factorization& f) {
  std::vector<u64> out{1};
  for (const auto& pp : f) {
    const std::size_t base = out.size();
    u64 pk = 1;
    for (unsigned k = 1; k <= pp.exponent; ++k) {
      pk *= pp.prime;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<u64> divisors(u64 n) { return divisors(factorize(n)); }

u64 gcd(u64 a, u64 b) { return std::gcd(a, b); }

u64 lcm(u64 a, u64 b) {
  if (a == 0 || b == 0) return 0;
  const u64 g = std::gcd(a, b);
  u64 out;
  if (__builtin_mul_overflow(a / g, b, &out)) throw std::overflow_error("lcm overflows 64 bits");
  return out;
}

u64 ipow(u64 p, unsigned k) {
  u64 r = 1;
  for (unsigned i = 0; i < k; ++i) {
    if (__builtin_mul_overflow(r, p, &r)) {
      throw std::overflow_error("ipow: " + std::to_string(p) + "^" + std::to_string(k) + " overflows");
    }
  }
  return r;
}

unsigned valuation(u64 n, u64 p) {
  unsigned k = 0;
  while (n % p == 0) {
    n /= p;
    ++k;
  }
  return k;
}

}  // namespace divcorr
