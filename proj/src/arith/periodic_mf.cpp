#include "divcorr/periodic_mf.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace divcorr {

namespace {

double magnitude(const ExactScalar& z) { return std::abs(z.to_complex()); }

// Euler's totient from a factorization.
u64 totient(const Factorization& f) {
  u64 r = 1;
  for (const auto& pp : f) r *= (pp.prime - 1) * ipow(pp.prime, pp.exponent - 1);
  return r;
}

}  // namespace

MultiplicativeFunction::MultiplicativeFunction(std::map<u64, std::vector<ExactScalar>> table)
    : table_(std::move(table)) {}

ExactScalar MultiplicativeFunction::at_prime_power(u64 p, unsigned k) const {
  if (k == 0) return 1;
  auto it = table_.find(p);
  if (it == table_.end() || it->second.empty()) return 1;
  const auto& vals = it->second;
  return vals[std::min<std::size_t>(k, vals.size()) - 1];
}

ExactScalar MultiplicativeFunction::operator()(u64 n) const {
  ExactScalar v = 1;
  for (const auto& pp : factorize(n)) v *= at_prime_power(pp.prime, pp.exponent);
  return v;
}

InvalidPeriodicFunction::InvalidPeriodicFunction(MfReport report)
    : std::invalid_argument([&] {
        std::ostringstream os;
        os << "invalid periodic multiplicative function (M=" << report.period << "):";
        for (const auto& v : report.violations) os << "\n  - " << v;
        return os.str();
      }()),
      report_(std::move(report)) {}

MfReport validate_periodic_mf(u64 M, const std::vector<TableEntry>& table,
                              const ValidationOptions& opts) {
  MfReport rep;
  rep.period = M;
  if (M == 0) {
    rep.violations.push_back("period M must be positive");
    return rep;
  }
  const Factorization fm = factorize(M);

  // Keys must be exactly {(p, j) : p^a || M, 1 <= j <= a}.
  std::map<std::pair<u64, unsigned>, ExactScalar> given;
  for (const auto& e : table) {
    if (!given.emplace(std::make_pair(e.p, e.k), e.value).second) {
      rep.violations.push_back("duplicate table entry (p=" + std::to_string(e.p) +
                               ", k=" + std::to_string(e.k) + ")");
    }
  }
  std::set<std::pair<u64, unsigned>> expected;
  for (const auto& pp : fm) {
    for (unsigned j = 1; j <= pp.exponent; ++j) expected.insert({pp.prime, j});
  }
  for (const auto& key : expected) {
    if (!given.count(key)) {
      rep.violations.push_back("missing table entry (p=" + std::to_string(key.first) +
                               ", k=" + std::to_string(key.second) + ")");
    }
  }
  for (const auto& [key, v] : given) {
    if (!expected.count(key)) {
      rep.violations.push_back("table entry (p=" + std::to_string(key.first) + ", k=" +
                               std::to_string(key.second) + ") is not a prime power dividing M");
    }
  }
  if (!rep.violations.empty()) return rep;

  std::map<u64, std::vector<ExactScalar>> vals;
  for (const auto& [key, v] : given) vals[key.first].push_back(v);  // map order gives k ascending
  const MultiplicativeFunction f(vals);

  // Condition i: for some q | M with q^a || M,
  //   sum_{k<a} f(q^k)/q^k + f(q^a)/(q^{a-1}(q-1)) = 0.
  for (const auto& pp : fm) {
    const u64 q = pp.prime;
    const unsigned a = pp.exponent;
    ExactScalar s = 0;
    mpq_class qk = 1;  // q^k
    for (unsigned k = 0; k < a; ++k) {
      s += f.at_prime_power(q, k) * ExactScalar(mpq_class(1) / qk);
      qk *= q;
    }
    const mpq_class tail = mpq_class(1) / (mpq_class(qk / q) * (q - 1));
    s += f.at_prime_power(q, a) * ExactScalar(tail);
    const double r = magnitude(s);
    rep.condition_i_residual[q] = r;
    const bool ok = opts.tolerance_mode ? r <= opts.tolerance : s.is_zero();
    if (ok && !rep.witness) rep.witness = q;
  }
  if (!rep.witness) {
    std::ostringstream os;
    os << "condition i fails for every prime q | M (residuals:";
    for (const auto& [q, r] : rep.condition_i_residual) os << " q=" << q << ":" << r;
    os << ")";
    rep.violations.push_back(os.str());
  }

  // Condition ii: stabilization beyond the exponent in M (checked up to a+10).
  for (const auto& pp : fm) {
    const ExactScalar top = f.at_prime_power(pp.prime, pp.exponent);
    for (unsigned k = pp.exponent + 1; k <= pp.exponent + 10; ++k) {
      if (!(f.at_prime_power(pp.prime, k) == top)) {
        rep.violations.push_back("condition ii fails at p=" + std::to_string(pp.prime) +
                                 ", k=" + std::to_string(k));
        break;
      }
    }
  }

  // Condition iii: value 1 on powers of sampled primes coprime to M.
  unsigned sampled = 0;
  for (u64 p = 2; sampled < 20; ++p) {
    if (!is_prime(p) || M % p == 0) continue;
    ++sampled;
    for (unsigned k = 1; k <= 4; ++k) {
      if (!(f.at_prime_power(p, k) == ExactScalar(1))) {
        rep.violations.push_back("condition iii fails at p=" + std::to_string(p));
      }
    }
  }

  // f(n) depends on gcd(n, M) only, so the period sum groups by d = gcd.
  auto value_of_divisor = [&](u64 d) {
    ExactScalar v = 1;
    for (const auto& pp : fm) v *= f.at_prime_power(pp.prime, valuation(d, pp.prime));
    return v;
  };
  ExactScalar period_sum = 0;
  double abs_sum = 0;
  for (u64 d : divisors(fm)) {
    const ExactScalar fd = value_of_divisor(d);
    const u64 count = totient(factorize(M / d));
    period_sum += fd * ExactScalar(static_cast<long>(count));
    abs_sum += magnitude(fd) * static_cast<double>(count);
  }
  const bool sum_ok = opts.tolerance_mode
                          ? magnitude(period_sum) <= opts.tolerance * std::max(1.0, abs_sum)
                          : period_sum.is_zero();
  if (!sum_ok) rep.violations.push_back("period sum is " + period_sum.str() + ", expected 0");

  // Periodicity, sampled against the full multiplicative evaluation.
  const u64 samples = std::min<u64>(M, 2048);
  for (u64 n = 1; n <= samples; ++n) {
    if (!(f(n) == f(n + M))) {
      rep.violations.push_back("periodicity fails: f(" + std::to_string(n) + ") != f(" +
                               std::to_string(n + M) + ")");
      break;
    }
  }

  if (value_of_divisor(M).is_zero()) rep.advisories.push_back("f(M) = 0");
  return rep;
}

PeriodicMF make_periodic_mf(u64 M, const std::vector<TableEntry>& table,
                            const ValidationOptions& opts) {
  MfReport rep = validate_periodic_mf(M, table, opts);
  if (!rep.valid()) throw InvalidPeriodicFunction(std::move(rep));
  std::map<u64, std::vector<ExactScalar>> vals;
  std::map<std::pair<u64, unsigned>, ExactScalar> ordered;
  for (const auto& e : table) ordered.emplace(std::make_pair(e.p, e.k), e.value);
  for (const auto& [key, v] : ordered) vals[key.first].push_back(v);

  PeriodicMF out;
  out.period_ = M;
  out.witness_ = *rep.witness;
  out.period_fact_ = factorize(M);
  out.base_ = MultiplicativeFunction(std::move(vals));
  out.report_ = std::move(rep);
  out.tolerance_mode_ = opts.tolerance_mode;
  return out;
}

std::vector<TableEntry> PeriodicMF::entries() const {
  std::vector<TableEntry> out;
  for (const auto& [p, vals] : base_.table()) {
    for (std::size_t k = 0; k < vals.size(); ++k) {
      out.push_back({p, static_cast<unsigned>(k + 1), vals[k]});
    }
  }
  return out;
}

ExactScalar PeriodicMF::operator()(u64 n) const {
  if (n == 0) throw std::invalid_argument("PeriodicMF: n must be positive");
  ExactScalar v = 1;
  for (const auto& pp : period_fact_) {
    const unsigned k = std::min(valuation(n, pp.prime), pp.exponent);
    if (k) v *= base_.at_prime_power(pp.prime, k);
  }
  return v;
}

ExactScalar eval(const PeriodicMF& f, u64 n) { return f(n); }

DivisorMap dirichlet_convolve(const DivisorMap& f, const DivisorMap& g, u64 N) {
  const auto divs = divisors(N);
  for (u64 d : divs) {
    if (!f.count(d)) throw std::invalid_argument("dirichlet_convolve: left operand missing divisor " + std::to_string(d));
    if (!g.count(d)) throw std::invalid_argument("dirichlet_convolve: right operand missing divisor " + std::to_string(d));
  }
  DivisorMap out;
  for (u64 n : divs) {
    ExactScalar s = 0;
    for (u64 d : divs) {
      if (d > n) break;
      if (n % d == 0) s += f.at(d) * g.at(n / d);
    }
    out.emplace(n, std::move(s));
  }
  return out;
}

DivisorMap restrict_to_divisors(const std::function<ExactScalar(u64)>& f, u64 N) {
  DivisorMap out;
  for (u64 d : divisors(N)) out.emplace(d, f(d));
  return out;
}

CoefficientVector g_coefficients(const PeriodicMF& f1, const PeriodicMF& f2) {
  u64 N;
  if (__builtin_mul_overflow(f1.period(), f2.period(), &N)) {
    throw std::overflow_error("g_coefficients: M1*M2 overflows");
  }
  const auto mobius = restrict_to_divisors([](u64 n) { return ExactScalar(mu(n)); }, N);
  const auto a = dirichlet_convolve(restrict_to_divisors(f1, N), mobius, N);
  const auto b = dirichlet_convolve(restrict_to_divisors(f2, N), mobius, N);
  return {N, dirichlet_convolve(a, b, N)};
}

ExactScalar partial_sum(const std::function<ExactScalar(u64)>& f, double x) {
  if (!(x >= 0)) throw std::invalid_argument("partial_sum: x must be non-negative");
  const u64 n = static_cast<u64>(std::floor(x));
  ExactScalar s = 0;
  for (u64 k = 1; k <= n; ++k) s += f(k);
  return s;
}

PeriodicMF parity_function() { return make_periodic_mf(2, {{2, 1, ExactScalar(-1)}}); }

PeriodicMF prime_periodic_function(u64 q) {
  if (!is_prime(q)) throw std::invalid_argument("prime_periodic_function: q must be prime");
  return make_periodic_mf(q, {{q, 1, ExactScalar(1 - static_cast<long>(q))}});
}

}  // namespace divcorr
