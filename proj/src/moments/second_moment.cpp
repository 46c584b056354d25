#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <type_traits>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

#include "divcorr/divisor_delta.hpp"
#include "divcorr/moments.hpp"
#include "divcorr/parallel.hpp"

namespace divcorr {

namespace {

using i128 = __int128;
using u128 = unsigned __int128;

constexpr u64 kMaxPeriod = u64{1} << 24;
constexpr u64 kSegment = u64{1} << 20;

mpz_class to_mpz(i128 v) {
  const bool neg = v < 0;
  u128 m = neg ? -static_cast<u128>(v) : static_cast<u128>(v);
  mpz_class hi = static_cast<unsigned long>(static_cast<u64>(m >> 64));
  mpz_class r = (hi << 64) + mpz_class(static_cast<unsigned long>(static_cast<u64>(m)));
  return neg ? mpz_class(-r) : r;
}
mpz_class to_mpz(u128 v) {
  mpz_class hi = static_cast<unsigned long>(static_cast<u64>(v >> 64));
  return (hi << 64) + mpz_class(static_cast<unsigned long>(static_cast<u64>(v)));
}
mpz_class to_mpz(i64 v) { return mpz_class(static_cast<long>(v)); }
const mpz_class& to_mpz(const mpz_class& v) { return v; }

// Unsigned 128-bit accumulator that spills into an mpz on overflow.
class WideAcc {
 public:
  void add(u128 v) {
    const u128 s = lo_ + v;
    if (s < lo_) {
      spill_ += to_mpz(lo_);
      lo_ = v;
    } else {
      lo_ = s;
    }
  }
  mpz_class value() const { return spill_ + to_mpz(lo_); }

 private:
  u128 lo_ = 0;
  mpz_class spill_ = 0;
};

// f(r mod M) scaled to Gaussian integers by the lcm of the denominators of f on divisors of M.
struct ScaledTable {
  u64 period = 1;
  mpz_class scale = 1;
  std::vector<mpz_class> re, im;
  std::vector<i64> re64, im64;
  double max_abs = 0;
  bool real = true;
};

ScaledTable scale_table(const PeriodicMF& f) {
  const u64 M = f.period();
  if (M > kMaxPeriod) throw std::invalid_argument("period " + std::to_string(M) + " exceeds the supported maximum 2^24");
  ScaledTable t;
  t.period = M;
  std::map<u64, ExactScalar> on_divisors;
  for (u64 d : divisors(f.period_factorization())) {
    const ExactScalar v = f(d);
    mpz_class l;
    mpz_lcm(l.get_mpz_t(), t.scale.get_mpz_t(), v.re().get_den_mpz_t());
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.im().get_den_mpz_t());
    t.scale = l;
    on_divisors.emplace(d, v);
  }
  std::map<u64, std::pair<mpz_class, mpz_class>> scaled;
  for (const auto& [d, v] : on_divisors) {
    const mpq_class re = v.re() * t.scale;
    const mpq_class im = v.im() * t.scale;
    scaled.emplace(d, std::make_pair(re.get_num(), im.get_num()));
    if (im != 0) t.real = false;
    t.max_abs = std::max({t.max_abs, std::fabs(re.get_d()), std::fabs(im.get_d())});
  }
  t.re.resize(M);
  t.im.resize(M);
  for (u64 r = 0; r < M; ++r) {
    const auto& v = scaled.at(gcd(r == 0 ? M : r, M));
    t.re[r] = v.first;
    t.im[r] = v.second;
  }
  if (t.max_abs < 9.0e18) {
    t.re64.resize(M);
    t.im64.resize(M);
    for (u64 r = 0; r < M; ++r) {
      t.re64[r] = t.re[r].get_si();
      t.im64[r] = t.im[r].get_si();
    }
  }
  return t;
}

template <class V>
struct Value;
template <>
struct Value<i64> {
  static const std::vector<i64>& re(const ScaledTable& t) { return t.re64; }
  static const std::vector<i64>& im(const ScaledTable& t) { return t.im64; }
};
template <>
struct Value<mpz_class> {
  static const std::vector<mpz_class>& re(const ScaledTable& t) { return t.re; }
  static const std::vector<mpz_class>& im(const ScaledTable& t) { return t.im; }
};

struct Pair {
  ScaledTable f1, f2;
  mpz_class scale;
  bool real = true;
  bool fast = false;
};

// The fast path needs every partial sum (and so every h(n) and product) to fit in int64.
Pair make_pair_tables(const PeriodicMF& f1, const PeriodicMF& f2, double x_max) {
  Pair p{scale_table(f1), scale_table(f2), 0, true, false};
  p.scale = p.f1.scale * p.f2.scale;
  p.real = p.f1.real && p.f2.real;
  const double xm = std::max(x_max, 3.0);
  const double bound = 4.0 * p.f1.max_abs * p.f2.max_abs * xm * (std::log(xm) + 1.0);
  p.fast = !p.f1.re64.empty() && !p.f2.re64.empty() && bound < 0x1p61;
  return p;
}

// h(n) = sum_{de = n} f1(d) f2(e) (scaled) for n in [lo, hi], via divisor pairs d <= sqrt(n).
template <class V>
void convolve_segment(const Pair& p, u64 lo, u64 hi, std::vector<V>& hre, std::vector<V>& him) {
  const std::size_t len = hi - lo + 1;
  hre.assign(len, V(0));
  him.assign(len, V(0));
  const auto& a_re = Value<V>::re(p.f1);
  const auto& a_im = Value<V>::im(p.f1);
  const auto& b_re = Value<V>::re(p.f2);
  const auto& b_im = Value<V>::im(p.f2);
  const u64 M1 = p.f1.period, M2 = p.f2.period;
  const u64 root = isqrt(hi);
  for (u64 d = 1; d <= root; ++d) {
    u64 n = std::max(lo, d * d);
    n = (n + d - 1) / d * d;
    if (n > hi) continue;
    u64 e = n / d;
    const u64 d1 = d % M1, d2 = d % M2;
    u64 e1 = e % M1, e2 = e % M2;
    for (; n <= hi; n += d, ++e) {
      const std::size_t i = n - lo;
      if (e == d) {
        hre[i] += a_re[d1] * b_re[d2];
        if (!p.real) {
          hre[i] -= a_im[d1] * b_im[d2];
          him[i] += a_re[d1] * b_im[d2] + a_im[d1] * b_re[d2];
        }
      } else {
        hre[i] += a_re[d1] * b_re[e2] + a_re[e1] * b_re[d2];
        if (!p.real) {
          hre[i] -= a_im[d1] * b_im[e2] + a_im[e1] * b_im[d2];
          him[i] += a_re[d1] * b_im[e2] + a_im[d1] * b_re[e2] + a_re[e1] * b_im[d2] + a_im[e1] * b_re[d2];
        }
      }
      if (++e1 == M1) e1 = 0;
      if (++e2 == M2) e2 = 0;
    }
  }
}

struct ExactComplex {
  mpz_class re = 0, im = 0;
  mpz_class norm() const { return re * re + im * im; }
};

struct FractionalPiece {
  double weight;
  ExactComplex offset;  // T(n) relative to the chunk base
};

struct ChunkSummary {
  u64 full_count = 0;
  ExactComplex sum_offset;   // sum of T(n) over full-weight n
  mpz_class sum_norm = 0;    // sum of |T(n)|^2 over full-weight n
  std::vector<FractionalPiece> fractional;
  ExactComplex end_offset;   // T(floor(hi))
};

template <class V>
struct Accumulators;
template <>
struct Accumulators<i64> {
  using Sum = i128;
  using Norm = WideAcc;
  static void add_norm(Norm& acc, i64 re, i64 im) {
    const u128 r = static_cast<u128>(static_cast<i128>(re) * re);
    const u128 s = static_cast<u128>(static_cast<i128>(im) * im);
    acc.add(r);
    acc.add(s);
  }
  static mpz_class norm_value(const Norm& acc) { return acc.value(); }
};
template <>
struct Accumulators<mpz_class> {
  using Sum = mpz_class;
  using Norm = mpz_class;
  static void add_norm(Norm& acc, const mpz_class& re, const mpz_class& im) { acc += re * re + im * im; }
  static mpz_class norm_value(const Norm& acc) { return acc; }
};

// Summarizes S(x) - S(floor(lo)) on [lo, hi] for the exact integral of |S|^2.
template <class V>
ChunkSummary summarize_chunk(const Pair& p, double lo, double hi) {
  using A = Accumulators<V>;
  ChunkSummary out;
  const u64 n0 = static_cast<u64>(std::floor(lo));
  const u64 n1 = static_cast<u64>(std::floor(hi));
  std::vector<V> hre, him;
  if (n1 > n0) convolve_segment<V>(p, n0 + 1, n1, hre, him);
  typename A::Sum sre = 0, sim = 0;
  typename A::Norm norm{};
  V tre = 0, tim = 0;
  for (u64 n = n0; n <= n1; ++n) {
    if (n > n0) {
      tre += hre[n - n0 - 1];
      tim += him[n - n0 - 1];
    }
    const double a = std::max(static_cast<double>(n), lo);
    const double b = std::min(static_cast<double>(n) + 1.0, hi);
    const double w = b - a;
    if (w == 1.0) {
      ++out.full_count;
      sre += tre;
      sim += tim;
      A::add_norm(norm, tre, tim);
    } else if (w > 0.0) {
      out.fractional.push_back({w, {to_mpz(tre), to_mpz(tim)}});
    }
  }
  out.sum_offset = {to_mpz(sre), to_mpz(sim)};
  out.sum_norm = A::norm_value(norm);
  out.end_offset = {to_mpz(tre), to_mpz(tim)};
  return out;
}

ChunkSummary summarize(const Pair& p, double lo, double hi) {
  return p.fast ? summarize_chunk<i64>(p, lo, hi) : summarize_chunk<mpz_class>(p, lo, hi);
}

// S(n) (scaled) by streaming segments from 1.
template <class V>
void stream_prefix(const Pair& p, u64 n_max, const std::function<void(u64, const mpz_class&, const mpz_class&)>& visit) {
  mpz_class sre = 0, sim = 0;
  visit(0, sre, sim);
  std::vector<V> hre, him;
  for (u64 lo = 1; lo <= n_max; lo += kSegment) {
    const u64 hi = std::min(n_max, lo + kSegment - 1);
    convolve_segment<V>(p, lo, hi, hre, him);
    if constexpr (std::is_same_v<V, i64>) {
      i64 tre = sre.get_si(), tim = sim.get_si();
      for (u64 n = lo; n <= hi; ++n) {
        tre += hre[n - lo];
        tim += him[n - lo];
        sre = static_cast<long>(tre);
        sim = static_cast<long>(tim);
        visit(n, sre, sim);
      }
    } else {
      for (u64 n = lo; n <= hi; ++n) {
        sre += hre[n - lo];
        sim += him[n - lo];
        visit(n, sre, sim);
      }
    }
  }
}

void for_each_prefix(const Pair& p, u64 n_max, const std::function<void(u64, const mpz_class&, const mpz_class&)>& visit) {
  if (p.fast) {
    stream_prefix<i64>(p, n_max, visit);
  } else {
    stream_prefix<mpz_class>(p, n_max, visit);
  }
}

ExactComplex prefix_at(const Pair& p, u64 n) {
  ExactComplex out;
  for_each_prefix(p, n, [&](u64 k, const mpz_class& re, const mpz_class& im) {
    if (k == n) out = {re, im};
  });
  return out;
}

double ratio(const mpz_class& num, const mpz_class& den) {
  if (mpz_sizeinbase(num.get_mpz_t(), 2) <= 53 && mpz_sizeinbase(den.get_mpz_t(), 2) <= 53) {
    return num.get_d() / den.get_d();
  }
  mpq_class q(num, den);
  q.canonicalize();
  return q.get_d();
}

// Running exact integral of |S|^2 from the first boundary, emitted at every boundary.
std::vector<double> exact_running(const Pair& p, const std::vector<double>& bounds, const IntegrationOptions& opts) {
  const std::size_t n = bounds.size() - 1;
  std::vector<ChunkSummary> parts(n);
  std::atomic<std::size_t> done{0};
  parallel_for(n, std::max(1u, opts.threads), [&](std::size_t i) {
    parts[i] = summarize(p, bounds[i], bounds[i + 1]);
    const std::size_t d = ++done;
    if (opts.progress) opts.progress(static_cast<double>(d) / n);
  });

  const mpz_class scale2 = p.scale * p.scale;
  ExactComplex base = prefix_at(p, static_cast<u64>(std::floor(bounds.front())));
  mpz_class exact = 0;
  CompensatedSum fractional;
  std::vector<double> running{0.0};
  running.reserve(bounds.size());
  for (const auto& c : parts) {
    exact += c.full_count * base.norm() + 2 * (base.re * c.sum_offset.re + base.im * c.sum_offset.im) + c.sum_norm;
    for (const auto& f : c.fractional) {
      const ExactComplex s{base.re + f.offset.re, base.im + f.offset.im};
      fractional.add(f.weight * ratio(s.norm(), scale2));
    }
    base.re += c.end_offset.re;
    base.im += c.end_offset.im;
    running.push_back(ratio(exact, scale2) + fractional.value());
  }
  return running;
}

std::vector<double> exact_boundaries(double lo, double hi, double chunk, const std::vector<double>& extra) {
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

double exact_chunk_length(const IntegrationOptions& opts) {
  return opts.chunk_length > 0 ? opts.chunk_length : static_cast<double>(kSegment);
}

std::complex<double> to_complex(const mpz_class& re, const mpz_class& im, const mpz_class& scale) {
  return {ratio(re, scale), ratio(im, scale)};
}

}  // namespace

std::vector<double> second_moment_running(const PeriodicMF& f1, const PeriodicMF& f2, const std::vector<double>& grid,
                                          const IntegrationOptions& opts) {
  if (grid.empty()) return {};
  if (grid.back() > opts.max_X) throw std::invalid_argument("grid exceeds the configured maximum X");
  const Pair p = make_pair_tables(f1, f2, grid.back());
  const auto bounds = exact_boundaries(1.0, grid.back(), exact_chunk_length(opts), grid);
  if (bounds.size() < 2) return std::vector<double>(grid.size(), 0.0);
  const auto running = exact_running(p, bounds, opts);
  std::vector<double> out;
  out.reserve(grid.size());
  std::size_t j = 0;
  for (double g : grid) {
    while (bounds[j] < g) ++j;
    out.push_back(running[j]);
  }
  return out;
}

double second_moment_exact(const PeriodicMF& f1, const PeriodicMF& f2, double lo, double hi) {
  if (!(lo >= 1.0) || !(hi >= lo)) throw std::invalid_argument("second_moment_exact: need 1 <= lo <= hi");
  if (hi == lo) return 0.0;
  const Pair p = make_pair_tables(f1, f2, hi);
  const auto bounds = exact_boundaries(lo, hi, static_cast<double>(kSegment), {});
  return exact_running(p, bounds, {}).back();
}

double second_moment_via_delta(const PeriodicMF& f1, const PeriodicMF& f2, double lo, double hi,
                               const IntegrationOptions& opts) {
  const CoefficientVector g = g_coefficients(f1, f2);
  std::vector<std::pair<u64, std::complex<double>>> terms;
  for (const auto& [n, v] : g.values) {
    if (!v.is_zero()) terms.emplace_back(n, v.to_complex());
  }
  CompensatedSum total;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = i; j < terms.size(); ++j) {
      const double w = (terms[i].second * std::conj(terms[j].second)).real() * (i == j ? 1.0 : 2.0);
      const double v =
          integrate_product(Scale::divide_by(terms[i].first), Scale::divide_by(terms[j].first), lo, hi, opts);
      total.add(w * v);
    }
  }
  return total.value();
}

std::vector<std::complex<double>> convolution_partial_sums(const PeriodicMF& f1, const PeriodicMF& f2, u64 n_max) {
  const Pair p = make_pair_tables(f1, f2, static_cast<double>(n_max));
  std::vector<std::complex<double>> out;
  out.reserve(n_max + 1);
  for_each_prefix(p, n_max, [&](u64, const mpz_class& re, const mpz_class& im) {
    out.push_back(to_complex(re, im, p.scale));
  });
  return out;
}

IdentityCheck identity_check(const PeriodicMF& f1, const PeriodicMF& f2, const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("identity_check: no sample points");
  const CoefficientVector g = g_coefficients(f1, f2);
  const double threshold = static_cast<double>(g.modulus);
  for (double x : samples) {
    if (!(x >= threshold) || !(x <= 1e8)) {
      throw std::invalid_argument("identity_check: sample x=" + std::to_string(x) + " outside [M1*M2, 1e8] = [" +
                                  std::to_string(g.modulus) + ", 1e8]");
    }
  }
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });

  const u64 n_max = static_cast<u64>(std::floor(samples[order.back()]));
  const Pair p = make_pair_tables(f1, f2, static_cast<double>(n_max));
  std::vector<std::complex<double>> lhs(samples.size());
  std::size_t next = 0;
  for_each_prefix(p, n_max, [&](u64 n, const mpz_class& re, const mpz_class& im) {
    while (next < order.size() && static_cast<u64>(std::floor(samples[order[next]])) == n) {
      lhs[order[next]] = to_complex(re, im, p.scale);
      ++next;
    }
  });

  IdentityCheck out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double x = samples[i];
    std::complex<double> rhs = 0;
    for (const auto& [n, v] : g.values) {
      if (v.is_zero()) continue;
      const double y = x / static_cast<double>(n);
      if (y >= 1.0) rhs += v.to_complex() * delta(y);
    }
    const double dev = std::abs(lhs[i] - rhs);
    if (dev > out.max_deviation || i == 0) {
      out.max_deviation = dev;
      out.worst_x = x;
    }
  }
  if (out.max_deviation > 1e-4) {
    throw std::runtime_error("identity_check: deviation " + std::to_string(out.max_deviation) + " at x=" +
                             std::to_string(out.worst_x));
  }
  return out;
}

}  // namespace divcorr
