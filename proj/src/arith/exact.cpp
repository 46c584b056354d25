#include "divcorr/exact.hpp"

#include <cctype>
#include <stdexcept>

namespace divcorr {

ExactScalar::ExactScalar(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im)) {
  re_.canonicalize();
  im_.canonicalize();
}

ExactScalar& ExactScalar::operator+=(const ExactScalar& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

ExactScalar& ExactScalar::operator-=(const ExactScalar& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

ExactScalar& ExactScalar::operator*=(const ExactScalar& o) {
  if (im_ == 0 && o.im_ == 0) {
    re_ *= o.re_;
    return *this;
  }
  mpq_class re = re_ * o.re_ - im_ * o.im_;
  mpq_class im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

ExactScalar& ExactScalar::operator/=(const ExactScalar& o) {
  const mpq_class n = o.norm();
  if (n == 0) throw std::domain_error("ExactScalar: division by zero");
  *this *= o.conj();
  re_ /= n;
  im_ /= n;
  return *this;
}

std::string ExactScalar::str() const {
  if (im_ == 0) return re_.get_str();
  std::string s = re_.get_str();
  s += im_ < 0 ? "-" : "+";
  s += mpq_class(abs(im_)).get_str();
  s += "i";
  return s;
}

std::string rational_to_string(const mpq_class& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

mpq_class parse_rational(std::string_view text, bool allow_decimal) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  s = s.substr(b);
  if (s.empty()) throw std::invalid_argument("empty rational literal");

  auto integer_like = [](const std::string& t) {
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
    }
    return true;
  };

  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    if (num.empty() || den.empty() || !integer_like(num) || !integer_like(den) || den[0] == '-') {
      throw std::invalid_argument("malformed rational literal '" + s + "'");
    }
    if (num[0] == '+') num.erase(0, 1);
    if (den[0] == '+') den.erase(0, 1);
    mpz_class n(num, 10), d(den, 10);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    mpq_class q(n, d);
    q.canonicalize();
    return q;
  }
  if (integer_like(s)) {
    if (s[0] == '+') s.erase(0, 1);
    return mpq_class(mpz_class(s, 10));
  }
  if (!allow_decimal) {
    throw std::invalid_argument("'" + s + "' is not an exact rational (use num/den or enable tolerance mode)");
  }
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed numeric literal '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("malformed numeric literal '" + s + "'");
  return mpq_class(v);
}

}  // namespace divcorr
