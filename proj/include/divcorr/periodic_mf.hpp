#pragma once

// Periodic multiplicative functions with bounded partial sums, Dirichlet
// convolution on divisor sets, and the coefficient vector g = f1*f2*mu*mu.

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "divcorr/arith.hpp"
#include "divcorr/exact.hpp"

namespace divcorr {

/// Values on the divisors of some N, keyed by divisor.
using DivisorMap = std::map<u64, ExactScalar>;

/// Multiplicative function given by a prime-power table. Primes outside the
/// table take the value 1 on every power; for a tabulated prime, exponents
/// beyond the largest tabulated one repeat the last value.
class MultiplicativeFunction {
 public:
  MultiplicativeFunction() = default;
  /// table[p][k-1] = f(p^k), k >= 1.
  explicit MultiplicativeFunction(std::map<u64, std::vector<ExactScalar>> table);

  ExactScalar at_prime_power(u64 p, unsigned k) const;
  ExactScalar operator()(u64 n) const;
  const std::map<u64, std::vector<ExactScalar>>& table() const { return table_; }

 private:
  std::map<u64, std::vector<ExactScalar>> table_;
};

struct TableEntry {
  u64 p;
  unsigned k;
  ExactScalar value;
};

struct ValidationOptions {
  /// Admit approximate (decimal) values; residuals are compared to tolerance.
  bool tolerance_mode = false;
  double tolerance = 1e-12;
};

/// Outcome of checking a candidate table against conditions i-iii,
/// periodicity and the vanishing period sum.
struct MfReport {
  u64 period = 0;
  std::optional<u64> witness;           // prime q satisfying condition i
  std::vector<std::string> violations;  // empty iff valid
  std::vector<std::string> advisories;  // e.g. f(M) = 0
  std::map<u64, double> condition_i_residual;  // |residual| per q | M
  bool valid() const { return violations.empty(); }
};

class PeriodicMF;

class InvalidPeriodicFunction : public std::invalid_argument {
 public:
  explicit InvalidPeriodicFunction(MfReport report);
  const MfReport& report() const { return report_; }

 private:
  MfReport report_;
};

MfReport validate_periodic_mf(u64 M, const std::vector<TableEntry>& table,
                              const ValidationOptions& opts = {});

/// Builds a validated function; throws InvalidPeriodicFunction listing every
/// violated condition.
PeriodicMF make_periodic_mf(u64 M, const std::vector<TableEntry>& table,
                            const ValidationOptions& opts = {});

class PeriodicMF {
 public:
  u64 period() const { return period_; }
  u64 witness() const { return witness_; }
  const MultiplicativeFunction& base() const { return base_; }
  const Factorization& period_factorization() const { return period_fact_; }
  const MfReport& report() const { return report_; }
  bool tolerance_mode() const { return tolerance_mode_; }
  std::vector<TableEntry> entries() const;

  /// f(n) through the factorization of gcd(n, M).
  ExactScalar operator()(u64 n) const;

 private:
  friend PeriodicMF make_periodic_mf(u64, const std::vector<TableEntry>&, const ValidationOptions&);
  u64 period_ = 1;
  u64 witness_ = 0;
  Factorization period_fact_;
  MultiplicativeFunction base_;
  MfReport report_;
  bool tolerance_mode_ = false;
};

ExactScalar eval(const PeriodicMF& f, u64 n);

/// (f*g)(n) = sum_{d|n} f(d) g(n/d) for every n | N. Throws
/// std::invalid_argument naming the first missing divisor.
DivisorMap dirichlet_convolve(const DivisorMap& f, const DivisorMap& g, u64 N);

/// Restriction of an arithmetic function to the divisors of N.
DivisorMap restrict_to_divisors(const std::function<ExactScalar(u64)>& f, u64 N);

/// Coefficients g = f1*f2*mu*mu on the divisors of M1*M2 (all divisors,
/// zero values included).
struct CoefficientVector {
  u64 modulus = 1;  // M1*M2
  DivisorMap values;
};

CoefficientVector g_coefficients(const PeriodicMF& f1, const PeriodicMF& f2);

/// sum_{n <= x} f(n), exact.
ExactScalar partial_sum(const std::function<ExactScalar(u64)>& f, double x);

// Canonical examples.
PeriodicMF parity_function();           // f(n) = (-1)^{n+1}, M = 2
PeriodicMF prime_periodic_function(u64 q);  // unique q-periodic member, f(q) = 1 - q

}  // namespace divcorr
