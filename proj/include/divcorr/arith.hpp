#pragma once

// Elementary arithmetic: factorization, divisor counting, Möbius, divisors.

#include <cstdint>
#include <utility>
#include <vector>

namespace divcorr {

using u64 = std::uint64_t;
using i64 = std::int64_t;

/// Largest argument accepted by factorize (2^63 - 1).
inline constexpr u64 kFactorizeCap = 0x7fffffffffffffffULL;

struct PrimePower {
  u64 prime;
  unsigned exponent;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Prime factorization sorted by strictly increasing prime.
using Factorization = std::vector<PrimePower>;

/// Trial division below 10^6, then Miller-Rabin plus Brent-Pollard rho.
/// Throws std::invalid_argument for n == 0 or n above kFactorizeCap.
Factorization factorize(u64 n);

bool is_prime(u64 n);

u64 tau(u64 n);
int mu(u64 n);

/// All divisors of n in ascending order, enumerated from the factorization.
std::vector<u64> divisors(u64 n);
std::vector<u64> divisors(const Factorization& f);

u64 gcd(u64 a, u64 b);
u64 lcm(u64 a, u64 b);

/// p^k with overflow detection (throws std::overflow_error).
u64 ipow(u64 p, unsigned k);

/// Exponent of p in n (n > 0, p > 1).
unsigned valuation(u64 n, u64 p);

}  // namespace divcorr
