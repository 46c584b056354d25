#pragma once

// Gaussian rationals: complex numbers with exact rational parts.

#include <gmpxx.h>

#include <complex>
#include <string>
#include <string_view>

namespace divcorr {

class ExactScalar {
 public:
  ExactScalar() = default;
  ExactScalar(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
  ExactScalar(mpq_class re, mpq_class im = 0);

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }

  ExactScalar conj() const { return {re_, -im_}; }
  /// |z|^2, exact.
  mpq_class norm() const { return re_ * re_ + im_ * im_; }
  bool is_zero() const { return re_ == 0 && im_ == 0; }
  bool is_real() const { return im_ == 0; }
  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }

  ExactScalar& operator+=(const ExactScalar& o);
  ExactScalar& operator-=(const ExactScalar& o);
  ExactScalar& operator*=(const ExactScalar& o);
  /// Division; throws std::domain_error on zero divisor.
  ExactScalar& operator/=(const ExactScalar& o);

  friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { return a += b; }
  friend ExactScalar operator-(ExactScalar a, const ExactScalar& b) { return a -= b; }
  friend ExactScalar operator*(ExactScalar a, const ExactScalar& b) { return a *= b; }
  friend ExactScalar operator/(ExactScalar a, const ExactScalar& b) { return a /= b; }
  friend ExactScalar operator-(const ExactScalar& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const ExactScalar& a, const ExactScalar& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  /// "a+bi" style rendering with rationals as num/den.
  std::string str() const;

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

/// Canonical "num/den"; the denominator is always written.
std::string rational_to_string(const mpq_class& q);

/// Parses "num/den" or an integer literal. When allow_decimal is set, a
/// decimal literal is accepted and converted through its exact binary64
/// value. Throws std::invalid_argument on malformed input.
mpq_class parse_rational(std::string_view text, bool allow_decimal = false);

}  // namespace divcorr
