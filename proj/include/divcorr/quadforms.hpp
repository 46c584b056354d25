#pragma once

// GCD/LCM-structured matrices
//   M_{S,phi}(a, b) = gcd(a,b)^{-1/2} phi(lcm(a,b)/gcd(a,b)),   a, b in S,
// their positive-definiteness certificates, the Selberg-diagonalization
// determinant, the tensor factorization over primes, and the conjugation
// A_K = U_K^T M_K U_K of the prime-power blocks.

#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "divcorr/arith.hpp"
#include "divcorr/periodic_mf.hpp"

namespace divcorr {

/// Dense square matrix of doubles, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  Matrix transpose() const;
  /// Top-left k x k block.
  Matrix leading(std::size_t k) const;
  double max_asymmetry() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Determinant by partial-pivot elimination (deterministic pivot order).
double determinant(Matrix m);

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(Matrix m);

/// Sorted, divisor-closed set of positive integers.
class DivisorClosedSet {
 public:
  /// Throws std::invalid_argument naming a missing divisor.
  explicit DivisorClosedSet(std::vector<u64> elements);
  static DivisorClosedSet divisors_of(u64 n);

  const std::vector<u64>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }

 private:
  std::vector<u64> elements_;
};

/// Non-negative multiplicative weight described on prime powers.
struct MultiplicativeWeight {
  std::string name;
  std::function<double(u64 p, unsigned k)> at_prime_power;
  /// Set when the weight is completely multiplicative: value at p.
  std::function<double(u64 p)> at_prime;

  double operator()(u64 n) const;

  static MultiplicativeWeight completely_multiplicative(std::string name, std::function<double(u64)> at_prime);
  /// n -> n^{-3/4}.
  static MultiplicativeWeight power(double exponent);
  /// phi of the correlation matrix: phi(p^k) = (k beta(p) + 1)/p^k.
  static MultiplicativeWeight correlation_phi();
  /// phi*(p^k) = (k beta(p) + 1)/p^{3k/4}.
  static MultiplicativeWeight correlation_phi_star();
};

struct GcdLcmMatrix {
  std::vector<u64> index;  // ascending
  std::string weight_name;
  Matrix entries;
};

/// Throws std::invalid_argument if S is not divisor closed or a weight value
/// is negative / non-finite.
GcdLcmMatrix build_matrix(const std::vector<u64>& S, const MultiplicativeWeight& phi);

struct SylvesterResult {
  bool positive_definite = false;
  std::vector<double> minors;  // leading principal minors, k = 1..n
};

/// Rejects matrices whose asymmetry exceeds 1e-12 (relative to the largest entry).
SylvesterResult sylvester_pd(const Matrix& m);

/// prod_{d in S} phi(d)^2 (mu * psi)(d), psi(p) = 1/(sqrt(p) phi(p)^2).
/// Requires a completely multiplicative weight with p^{1/4} phi(p) in (0, 1)
/// for every prime dividing an element of S.
double selberg_determinant(const std::vector<u64>& S, const MultiplicativeWeight& phi_cm);

struct TensorCheck {
  double lhs = 0;
  double rhs = 0;
};

/// Multiplicatively split variables: value x_{p^k} for every prime power in S.
using SplitVector = std::map<u64, double>;

/// Full quadratic form with x_a = prod_{p^k || a} x_{p^k} against the product
/// of local forms over the primes of S. S must contain exactly the products
/// of elements drawn from distinct S(p) = {1} u {p^k in S}; otherwise
/// std::invalid_argument lists the missing products.
TensorCheck tensor_factor_check(const std::vector<u64>& S, const MultiplicativeWeight& phi, const SplitVector& x);

/// Local block M_K(i, j) = phi*(p^{|i-j|}), 1 <= i, j <= K. Row i stands for p^{i-1}.
Matrix local_phi_star_matrix(unsigned K, u64 p);

/// U_K: unit diagonal, -p^{-3/4} at (i+1, i) and at (K-1, K) in 1-based indices.
Matrix build_U(unsigned K, u64 p);

/// U^T M U.
Matrix conjugate(const Matrix& M, const Matrix& U);

/// Closed form of A_K: beta(1 - p^{-3/2}) p^{-3|i-j|/4} when i, j <= K-1 or i = j = K, else 0.
Matrix prop_a_closed_form(unsigned K, u64 p);

struct PropACheck {
  double max_deviation = 0;
  unsigned worst_i = 0, worst_j = 0;  // 1-based
};

/// Max |A_K(i,j) - closed form|. Throws std::runtime_error if above 1e-10.
PropACheck check_prop_A(unsigned K, u64 p);

/// Correlation matrix (c_{a,b})_{a,b | N}.
GcdLcmMatrix correlation_matrix(u64 N);

struct PdCertificate {
  std::vector<u64> index_set;
  std::vector<double> minors;
  bool positive_definite = false;
};

/// Sylvester certificate for (c_{a,b}) over the divisors of M1*M2. Throws
/// std::logic_error on any non-positive minor.
PdCertificate pd_certificate(const PeriodicMF& f1, const PeriodicMF& f2);
PdCertificate pd_certificate(u64 N);

std::string pd_certificate_json(const PdCertificate& c, int indent = 2);
std::string pd_certificate_csv(const PdCertificate& c);

/// Row-major CSV with the index set as header row.
void write_csv(std::ostream& os, const GcdLcmMatrix& m);

}  // namespace divcorr
