#include "divcorr/quadforms.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "divcorr/special_values.hpp"
#include "json.hpp"

namespace divcorr {

namespace {

void require_divisor_closed(const std::vector<u64>& S) {
  const std::set<u64> members(S.begin(), S.end());
  for (u64 a : S) {
    if (a == 0) throw std::invalid_argument("index set contains 0");
    for (u64 d : divisors(a)) {
      if (!members.count(d)) {
        throw std::invalid_argument("index set is not divisor closed: " + std::to_string(d) + " divides " +
                                    std::to_string(a) + " but is missing");
      }
    }
  }
}

std::vector<u64> sorted_unique(std::vector<u64> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<u64> primes_of(const std::vector<u64>& S) {
  std::set<u64> ps;
  for (u64 a : S)
    for (const auto& pp : factorize(a)) ps.insert(pp.prime);
  return {ps.begin(), ps.end()};
}

}  // namespace

DivisorClosedSet::DivisorClosedSet(std::vector<u64> elements) : elements_(sorted_unique(std::move(elements))) {
  require_divisor_closed(elements_);
}

DivisorClosedSet DivisorClosedSet::divisors_of(u64 n) { return DivisorClosedSet(divisors(n)); }

double MultiplicativeWeight::operator()(u64 n) const {
  double v = 1.0;
  for (const auto& pp : factorize(n)) v *= at_prime_power(pp.prime, pp.exponent);
  return v;
}

MultiplicativeWeight MultiplicativeWeight::completely_multiplicative(std::string name,
                                                                     std::function<double(u64)> at_prime) {
  MultiplicativeWeight w;
  w.name = std::move(name);
  w.at_prime = at_prime;
  w.at_prime_power = [at_prime](u64 p, unsigned k) { return std::pow(at_prime(p), static_cast<double>(k)); };
  return w;
}

MultiplicativeWeight MultiplicativeWeight::power(double exponent) {
  std::ostringstream os;
  os << "n^" << exponent;
  auto w = completely_multiplicative(os.str(), [exponent](u64 p) { return std::pow(static_cast<double>(p), exponent); });
  // Exact powers rather than repeated products.
  w.at_prime_power = [exponent](u64 p, unsigned k) {
    return std::pow(static_cast<double>(p), exponent * static_cast<double>(k));
  };
  return w;
}

MultiplicativeWeight MultiplicativeWeight::correlation_phi() {
  MultiplicativeWeight w;
  w.name = "phi";
  w.at_prime_power = [](u64 p, unsigned k) { return phi(p, k); };
  return w;
}

MultiplicativeWeight MultiplicativeWeight::correlation_phi_star() {
  MultiplicativeWeight w;
  w.name = "phi*";
  w.at_prime_power = [](u64 p, unsigned k) { return phi_star(p, k); };
  return w;
}

GcdLcmMatrix build_matrix(const std::vector<u64>& S_in, const MultiplicativeWeight& phi) {
  const auto S = sorted_unique(S_in);
  require_divisor_closed(S);
  GcdLcmMatrix out{S, phi.name, Matrix(S.size())};
  for (std::size_t i = 0; i < S.size(); ++i) {
    for (std::size_t j = i; j < S.size(); ++j) {
      const u64 g = gcd(S[i], S[j]);
      const u64 ratio = (S[i] / g) * (S[j] / g);
      const double w = phi(ratio);
      if (!std::isfinite(w) || w < 0.0) {
        throw std::invalid_argument("weight " + phi.name + " is negative or non-finite at " + std::to_string(ratio));
      }
      const double e = w / std::sqrt(static_cast<double>(g));
      out.entries(i, j) = e;
      out.entries(j, i) = e;
    }
  }
  return out;
}

SylvesterResult sylvester_pd(const Matrix& m) {
  double scale = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) scale = std::max(scale, std::abs(m(i, j)));
  if (m.max_asymmetry() > 1e-12 * std::max(1.0, scale)) {
    throw std::invalid_argument("sylvester_pd: matrix is not symmetric (asymmetry " +
                                std::to_string(m.max_asymmetry()) + ")");
  }
  SylvesterResult r;
  r.positive_definite = true;
  for (std::size_t k = 1; k <= m.size(); ++k) {
    const double minor = determinant(m.leading(k));
    r.minors.push_back(minor);
    if (!(minor > 0.0)) r.positive_definite = false;
  }
  return r;
}

double selberg_determinant(const std::vector<u64>& S_in, const MultiplicativeWeight& phi_cm) {
  if (!phi_cm.at_prime) {
    throw std::invalid_argument("selberg_determinant: weight " + phi_cm.name + " is not completely multiplicative");
  }
  const auto S = sorted_unique(S_in);
  require_divisor_closed(S);
  std::map<u64, double> psi;  // psi(p) = 1/(sqrt(p) phi(p)^2)
  for (u64 p : primes_of(S)) {
    const double fp = phi_cm.at_prime(p);
    const double t = std::pow(static_cast<double>(p), 0.25) * fp;
    if (!(t > 0.0 && t < 1.0)) {
      throw std::invalid_argument("selberg_determinant: p^{1/4} phi(p) = " + std::to_string(t) + " at p=" +
                                  std::to_string(p) + " is outside (0, 1)");
    }
    psi[p] = 1.0 / (std::sqrt(static_cast<double>(p)) * fp * fp);
  }
  double det = 1.0;
  for (u64 d : S) {
    // (mu * psi)(d) = prod_{p^k || d} psi(p)^{k-1} (psi(p) - 1)
    double h = 1.0;
    for (const auto& pp : factorize(d)) {
      const double s = psi.at(pp.prime);
      h *= std::pow(s, pp.exponent - 1.0) * (s - 1.0);
    }
    const double fd = phi_cm(d);
    det *= fd * fd * h;
  }
  return det;
}

TensorCheck tensor_factor_check(const std::vector<u64>& S_in, const MultiplicativeWeight& phi, const SplitVector& x) {
  const auto S = sorted_unique(S_in);
  const std::set<u64> members(S.begin(), S.end());
  if (!members.count(1)) throw std::invalid_argument("tensor_factor_check: S must contain 1");

  // Local sets S(p) = {1} u {p^k in S}.
  std::map<u64, std::vector<u64>> local;
  for (u64 p : primes_of(S)) local[p] = {1};
  for (u64 a : S) {
    const auto f = factorize(a);
    if (f.size() == 1) local[f[0].prime].push_back(a);
  }
  std::vector<u64> products{1};
  for (const auto& [p, sp] : local) {
    std::vector<u64> next;
    for (u64 a : products)
      for (u64 q : sp) next.push_back(a * q);
    products = std::move(next);
  }
  products = sorted_unique(products);
  std::vector<u64> missing, stray;
  for (u64 v : products)
    if (!members.count(v)) missing.push_back(v);
  const std::set<u64> prodset(products.begin(), products.end());
  for (u64 a : S)
    if (!prodset.count(a)) stray.push_back(a);
  if (!missing.empty() || !stray.empty()) {
    std::ostringstream os;
    os << "tensor_factor_check: S is not product closed;";
    if (!missing.empty()) {
      os << " missing products:";
      for (u64 v : missing) os << ' ' << v;
    }
    if (!stray.empty()) {
      os << (missing.empty() ? "" : ";") << " elements with a prime-power component outside S:";
      for (u64 v : stray) os << ' ' << v;
    }
    throw std::invalid_argument(os.str());
  }

  auto xv = [&](u64 pk) {
    if (pk == 1) return 1.0;
    auto it = x.find(pk);
    if (it == x.end()) throw std::invalid_argument("tensor_factor_check: no value for x_" + std::to_string(pk));
    return it->second;
  };
  auto x_of = [&](u64 a) {
    double v = 1.0;
    for (const auto& pp : factorize(a)) v *= xv(ipow(pp.prime, pp.exponent));
    return v;
  };

  TensorCheck out;
  const auto m = build_matrix(S, phi);
  std::vector<double> xs(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) xs[i] = x_of(S[i]);
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = 0; j < S.size(); ++j) out.lhs += m.entries(i, j) * xs[i] * xs[j];

  out.rhs = 1.0;
  for (const auto& [p, sp] : local) {
    double form = 0.0;
    for (u64 u : sp)
      for (u64 v : sp) {
        const unsigned k = u == 1 ? 0 : valuation(u, p);
        const unsigned l = v == 1 ? 0 : valuation(v, p);
        const unsigned lo = std::min(k, l), hi = std::max(k, l);
        form += phi.at_prime_power(p, hi - lo) / std::pow(static_cast<double>(p), lo / 2.0) * xv(u) * xv(v);
      }
    out.rhs *= form;
  }
  return out;
}

Matrix local_phi_star_matrix(unsigned K, u64 p) {
  Matrix m(K);
  for (unsigned i = 0; i < K; ++i)
    for (unsigned j = 0; j < K; ++j) m(i, j) = phi_star(p, i > j ? i - j : j - i);
  return m;
}

Matrix build_U(unsigned K, u64 p) {
  if (K < 2) throw std::invalid_argument("build_U: K must be >= 2");
  if (!is_prime(p)) throw std::invalid_argument("build_U: p must be prime");
  const double q = std::pow(static_cast<double>(p), -0.75);
  Matrix u = Matrix::identity(K);
  for (unsigned i = 0; i + 1 < K; ++i) u(i + 1, i) = -q;
  u(K - 2, K - 1) = -q;
  return u;
}

Matrix conjugate(const Matrix& M, const Matrix& U) { return U.transpose() * M * U; }

Matrix prop_a_closed_form(unsigned K, u64 p) {
  const double pd = static_cast<double>(p);
  const double scale = beta(p) * (1.0 - std::pow(pd, -1.5));
  Matrix a(K);
  for (unsigned i = 1; i <= K; ++i)
    for (unsigned j = 1; j <= K; ++j) {
      const bool inside = (i <= K - 1 && j <= K - 1) || (i == K && j == K);
      if (inside) a(i - 1, j - 1) = scale * std::pow(pd, -0.75 * (i > j ? i - j : j - i));
    }
  return a;
}

PropACheck check_prop_A(unsigned K, u64 p) {
  const Matrix A = conjugate(local_phi_star_matrix(K, p), build_U(K, p));
  const Matrix ref = prop_a_closed_form(K, p);
  PropACheck out;
  for (unsigned i = 0; i < K; ++i)
    for (unsigned j = 0; j < K; ++j) {
      const double d = std::abs(A(i, j) - ref(i, j));
      if (d > out.max_deviation) out = {d, i + 1, j + 1};
    }
  if (out.max_deviation > 1e-10) {
    throw std::runtime_error("check_prop_A: deviation " + std::to_string(out.max_deviation) + " at (" +
                             std::to_string(out.worst_i) + "," + std::to_string(out.worst_j) + ") for K=" +
                             std::to_string(K) + ", p=" + std::to_string(p));
  }
  return out;
}

GcdLcmMatrix correlation_matrix(u64 N) {
  const auto S = divisors(N);
  GcdLcmMatrix out{S, "c", Matrix(S.size())};
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = i; j < S.size(); ++j) {
      const double c = correlation_limit(S[i], S[j]).value;
      out.entries(i, j) = c;
      out.entries(j, i) = c;
    }
  return out;
}

PdCertificate pd_certificate(u64 N) {
  const auto m = correlation_matrix(N);
  const auto syl = sylvester_pd(m.entries);
  PdCertificate c{m.index, syl.minors, syl.positive_definite};
  if (!c.positive_definite) {
    std::ostringstream os;
    os << "pd_certificate: non-positive leading minor for N=" << N << ":";
    for (double v : c.minors) os << ' ' << v;
    throw std::logic_error(os.str());
  }
  return c;
}

PdCertificate pd_certificate(const PeriodicMF& f1, const PeriodicMF& f2) {
  return pd_certificate(f1.period() * f2.period());
}

std::string pd_certificate_json(const PdCertificate& c, int indent) {
  nlohmann::json j;
  j["index_set"] = c.index_set;
  j["minors"] = c.minors;
  j["positive_definite"] = c.positive_definite;
  return j.dump(indent);
}

std::string pd_certificate_csv(const PdCertificate& c) {
  std::ostringstream os;
  os.precision(17);
  os << "k,index,minor,positive\n";
  for (std::size_t k = 0; k < c.minors.size(); ++k) {
    os << k + 1 << ',' << c.index_set[k] << ',' << c.minors[k] << ',' << (c.minors[k] > 0 ? "true" : "false")
       << '\n';
  }
  return os.str();
}

void write_csv(std::ostream& os, const GcdLcmMatrix& m) {
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < m.index.size(); ++i) os << (i ? "," : "") << m.index[i];
  os << '\n';
  for (std::size_t i = 0; i < m.index.size(); ++i) {
    for (std::size_t j = 0; j < m.index.size(); ++j) os << (j ? "," : "") << m.entries(i, j);
    os << '\n';
  }
  os.precision(old);
}

}  // namespace divcorr
