#include <doctest.h>

#include <quadmath.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "divcorr/divisor_delta.hpp"
#include "divcorr/moments.hpp"
#include "divcorr/special_values.hpp"

using namespace divcorr;

namespace {

using quad = __float128;

const quad kGammaQ = 0.577215664901532860606512090082402431Q;

quad D_brute(u64 n) {
  u64 s = 0;
  for (u64 k = 1; k <= n; ++k) s += n / k;
  return static_cast<quad>(s);
}

// Antiderivatives of x^i ln^j x.
quad F_x1(quad x) { return x * x / 2; }
quad F_x1l1(quad x) { return x * x / 2 * logq(x) - x * x / 4; }
quad F_x2(quad x) { return x * x * x / 3; }
quad F_x2l1(quad x) { return x * x * x / 3 * logq(x) - x * x * x / 9; }
quad F_x2l2(quad x) {
  const quad l = logq(x);
  return x * x * x / 3 * l * l - 2 * x * x * x / 9 * l + 2 * x * x * x / 27;
}

// Closed-form integral of (D1 - u(ln u + c))(D2 - v(ln v + c)), u = al x, v = be x, on [x0, x1].
quad closed_piece(quad D1, quad D2, quad al, quad be, quad x0, quad x1) {
  const quad c = 2 * kGammaQ - 1;
  const quad A1 = logq(al) + c, A2 = logq(be) + c;
  auto F = [&](quad x) {
    return D1 * D2 * x - D1 * be * (F_x1l1(x) + A2 * F_x1(x)) - D2 * al * (F_x1l1(x) + A1 * F_x1(x)) +
           al * be * (F_x2l2(x) + (A1 + A2) * F_x2l1(x) + A1 * A2 * F_x2(x));
  };
  return F(x1) - F(x0);
}

// Oracle for int_1^X Delta(al x) Delta(be x) dx with Delta = 0 below 1, all in binary128.
double oracle_integral(quad al, quad be, quad X) {
  std::vector<quad> pts{1, X};
  for (u64 m = 1; m / al < X; ++m)
    if (m / al > 1) pts.push_back(m / al);
  for (u64 m = 1; m / be < X; ++m)
    if (m / be > 1) pts.push_back(m / be);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  quad total = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const quad mid = (pts[i] + pts[i + 1]) / 2;
    const quad u = al * mid, v = be * mid;
    if (u < 1 || v < 1) continue;
    total += closed_piece(D_brute(static_cast<u64>(floorq(u))), D_brute(static_cast<u64>(floorq(v))), al, be, pts[i],
                          pts[i + 1]);
  }
  return static_cast<double>(total);
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// Exact int_1^X |S|^2 with S(x) = sum_{n<=x} (f1*f2)(n), from divisor enumeration.
double brute_second_moment(const PeriodicMF& f1, const PeriodicMF& f2, double X) {
  const u64 n_max = static_cast<u64>(std::floor(X));
  ExactScalar S = 0;
  mpq_class total = 0;
  for (u64 n = 1; n <= n_max; ++n) {
    ExactScalar h = 0;
    for (u64 d : divisors(n)) h += f1(d) * f2(n / d);
    S += h;
    const mpq_class w = n < n_max ? mpq_class(1) : mpq_class(X) - mpq_class(static_cast<double>(n_max));
    total += w * S.norm();
  }
  return total.get_d();
}

PeriodicMF complex_four_periodic() {
  // 1 + a/2 + b/2 = 0 with a = i.
  return make_periodic_mf(4, {{2, 1, ExactScalar(0, 1)}, {2, 2, ExactScalar(-2, -1)}});
}

PeriodicMF wide_denominator_function() {
  const mpq_class a(1, (1L << 30) + 3);
  return make_periodic_mf(4, {{2, 1, ExactScalar(a)}, {2, 2, ExactScalar(mpq_class(mpq_class(-2) - a))}});
}

}  // namespace

TEST_CASE("integration matches a binary128 closed-form oracle") {
  for (auto [a, b] : std::vector<std::pair<u64, u64>>{{1, 1}, {1, 2}, {2, 3}, {3, 5}, {4, 4}}) {
    for (double X : {57.25, 1000.0, 3777.5}) {
      const double got = integrate_product(Scale::divide_by(a), Scale::divide_by(b), 1.0, X);
      const double want = oracle_integral(quad(1) / a, quad(1) / b, X);
      CHECK_MESSAGE(rel(got, want) < 1e-12, "a=" << a << " b=" << b << " X=" << X);
    }
  }
  for (double theta : {(1 + std::sqrt(5.0)) / 2, std::sqrt(2.0), 0.7}) {
    const double got = integrate_product(Scale::divide_by(1), Scale::multiply_by(theta), 1.0, 2000.0);
    const double want = oracle_integral(1, static_cast<quad>(theta), 2000);
    CHECK_MESSAGE(std::fabs(got - want) < 1e-11 * 2000.0 * 2000.0, "theta=" << theta);
  }
}

TEST_CASE("breakpoint stream is strictly increasing and flags both scales") {
  BreakpointStream s(Scale::divide_by(2), Scale::divide_by(3), 1.0, 13.0);
  std::vector<double> xs;
  std::vector<std::pair<bool, bool>> flags;
  while (auto e = s.next()) {
    xs.push_back(e->x);
    flags.emplace_back(e->first, e->second);
  }
  CHECK(xs == std::vector<double>{2, 3, 4, 6, 8, 9, 10, 12});
  CHECK(flags[3] == std::make_pair(true, true));
  CHECK(flags[1] == std::make_pair(false, true));
  const Scale t = Scale::multiply_by(1.7);
  for (double x : {0.5, 1.0, 10.0 / 1.7, 1000.3}) {
    const u64 m = t.jumps_up_to(x);
    CHECK(t.breakpoint(m) <= x);
    CHECK(t.breakpoint(m + 1) > x);
  }
}

TEST_CASE("chunked evaluation equals a single pass") {
  const Scale s1 = Scale::divide_by(1), s2 = Scale::divide_by(3);
  const double X = 300000.5, X1 = 123456.78;
  IntegrationOptions one;
  one.chunk_length = 1e9;
  const double whole = integrate_product(s1, s2, 1.0, X, one);
  const double split = integrate_product(s1, s2, 1.0, X1, one) + integrate_product(s1, s2, X1, X, one);
  CHECK(rel(split, whole) < 1e-9);
  IntegrationOptions small;
  small.chunk_length = 777;
  CHECK(rel(integrate_product(s1, s2, 1.0, X, small), whole) < 1e-12);
}

TEST_CASE("thread count does not change results") {
  const std::vector<double> grid{1000, 20000, 150000.5};
  IntegrationOptions o1, o4;
  o4.threads = 4;
  o1.chunk_length = o4.chunk_length = 5000;
  const auto s = Scale::multiply_by(std::sqrt(3.0));
  CHECK(integrate_product_on_grid(Scale::divide_by(1), s, grid, o1) ==
        integrate_product_on_grid(Scale::divide_by(1), s, grid, o4));
  const PeriodicMF p = parity_function();
  CHECK(second_moment_running(p, p, grid, o1) == second_moment_running(p, p, grid, o4));
}

TEST_CASE("correlation integral invariants") {
  const std::vector<double> grid{100, 1000, 10000, 100000};
  const auto ab = correlation_integral(2, 5, 1e5, grid);
  const auto ba = correlation_integral(5, 2, 1e5, grid);
  CHECK(ab.integral == ba.integral);
  CHECK(ab.limit == correlation_limit(2, 5).value);
  for (u64 a : {1, 2, 3}) {
    for (double v : correlation_integral(a, a, 1e5, grid).integral) CHECK(v >= 0);
  }
  // x = 2t maps int_1^X Delta(x/2)^2 dx onto 2 int_1^{X/2} Delta(t)^2 dt (Delta = 0 below 1).
  const double two = correlation_integral(2, 2, 2e5, {2e5}).integral[0];
  const double one = correlation_integral(1, 1, 1e5, {1e5}).integral[0];
  CHECK(rel(two, 2 * one) < 1e-9);
  CHECK(correlation_integral(1, 1, 1e6, {1e6}).relative_error->front() < 0.10);
  CHECK_THROWS_AS(correlation_integral(1, 2, 1e4, {1e3, 2e4}), std::invalid_argument);
  CHECK_THROWS_AS(correlation_integral(0, 2, 1e4, {}), std::invalid_argument);
  IntegrationOptions capped;
  capped.max_X = 1e4;
  CHECK_THROWS_AS(correlation_integral(1, 1, 1e5, {}, capped), std::invalid_argument);
}

TEST_CASE("theta correlation") {
  const std::vector<double> grid{100, 1000, 10000, 50000};
  const auto t1 = theta_correlation(1.0, 5e4, grid);
  CHECK(t1.integral == correlation_integral(1, 1, 5e4, grid).integral);
  const auto half = theta_correlation(0.5, 5e4, grid);
  const auto c21 = correlation_integral(2, 1, 5e4, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rel(half.integral[i], c21.integral[i]) < 1e-9);
  CHECK(half.decay_slope.has_value());
  const auto r = theta_correlation(1.5, 5e4, grid, std::make_pair(u64{6}, u64{4}));
  CHECK(*r.limit == doctest::Approx(std::sqrt(3.0) * correlation_limit(3, 2).value).epsilon(1e-15));
  CHECK_FALSE(r.decay_slope.has_value());
  CHECK_THROWS(theta_correlation(1.5, 5e4, grid, std::make_pair(u64{5}, u64{4})));
  CHECK_THROWS(theta_correlation(0.0, 5e4, grid));
  CHECK_THROWS(theta_correlation(-1.0, 5e4, grid));
  const auto g = theta_correlation((1 + std::sqrt(5.0)) / 2, 1e6, {1e4, 1e5, 1e6});
  CHECK(std::fabs(g.normalized.back()) <= 0.1 * tong_constant());
  CHECK_FALSE(g.limit.has_value());
}

TEST_CASE("exact second moment against divisor enumeration") {
  const PeriodicMF p = parity_function();
  const PeriodicMF t = prime_periodic_function(3);
  const PeriodicMF z = complex_four_periodic();
  const PeriodicMF w = wide_denominator_function();
  for (const auto& [f1, f2] : {std::pair{&p, &p}, std::pair{&p, &t}, std::pair{&z, &t}, std::pair{&z, &z},
                               std::pair{&w, &p}, std::pair{&w, &w}}) {
    for (double X : {1.0, 2.5, 700.0, 2048.75}) {
      const double got = second_moment_running(*f1, *f2, {X})[0];
      const double want = brute_second_moment(*f1, *f2, X);
      if (want == 0) {
        CHECK(got == 0);
      } else {
        CHECK(rel(got, want) < 1e-14);
      }
    }
  }
  CHECK(second_moment_integral(p, p, 1.0, {1.0}).normalized[0] == 0.0);
}

TEST_CASE("wide values take the arbitrary-precision path consistently") {
  const PeriodicMF w = wide_denominator_function();
  IntegrationOptions small;
  small.chunk_length = 333;
  const std::vector<double> grid{10, 5000.5, 40000};
  const auto a = second_moment_running(w, w, grid);
  const auto b = second_moment_running(w, w, grid, small);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rel(a[i], b[i]) < 1e-14);
  CHECK(rel(a[1], brute_second_moment(w, w, 5000.5)) < 1e-14);
}

TEST_CASE("exact route agrees with the Delta decomposition above M1 M2") {
  const PeriodicMF p = parity_function();
  const PeriodicMF t = prime_periodic_function(3);
  CHECK(rel(second_moment_exact(p, p, 4, 1e4), second_moment_via_delta(p, p, 4, 1e4)) < 1e-9);
  CHECK(rel(second_moment_exact(p, t, 6, 1e4), second_moment_via_delta(p, t, 6, 1e4)) < 1e-9);
  CHECK(rel(second_moment_exact(t, t, 9, 2e4), second_moment_via_delta(t, t, 9, 2e4)) < 1e-9);
}

TEST_CASE("second moment series properties") {
  const PeriodicMF p = parity_function();
  std::vector<double> grid;
  for (double x = 1; x <= 20000; x *= 1.37) grid.push_back(x);
  const auto s = second_moment_integral(p, p, 20000, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(s.normalized[i] >= 0);
    if (i) CHECK(s.integral[i] >= s.integral[i - 1]);
  }
  const auto big = second_moment_integral(p, p, 1e6, {1e6});
  CHECK(rel(big.normalized[0], *big.limit) < 0.10);
}

TEST_CASE("convolution partial sums and the identity check") {
  const PeriodicMF p = parity_function();
  const PeriodicMF t = prime_periodic_function(3);
  const auto sums = convolution_partial_sums(p, t, 3000);
  ExactScalar S = 0;
  for (u64 n = 1; n <= 3000; ++n) {
    for (u64 d : divisors(n)) S += p(d) * t(n / d);
    CHECK(sums[n] == S.to_complex());
  }
  CHECK(sums[0] == std::complex<double>(0, 0));

  // Parity x parity at x = 100 against Delta(100) - 4 Delta(50) + 4 Delta(25).
  auto dlt = [](double x) {
    return static_cast<double>(D_brute(static_cast<u64>(x))) - x * std::log(x) - (2 * 0.5772156649015329 - 1) * x;
  };
  const auto pp = convolution_partial_sums(p, p, 100);
  CHECK(pp[100].real() == doctest::Approx(dlt(100) - 4 * dlt(50) + 4 * dlt(25)).epsilon(1e-12));
  const auto r = identity_check(p, p, {4.0, 100.0});
  CHECK(r.max_deviation < 1e-9);
  CHECK(identity_check(p, t, {6.0}).max_deviation < 1e-9);
  CHECK(identity_check(t, t, {9.0, 1234.5, 99999.9}).max_deviation < 1e-6);
  CHECK_THROWS_AS(identity_check(p, p, {3.5}), std::invalid_argument);
  CHECK_THROWS_AS(identity_check(p, p, {}), std::invalid_argument);
}

TEST_CASE("grids") {
  const auto g = parse_grid("log:1e4:1e6:5");
  CHECK(g.size() == 11);
  CHECK(g.front() == 1e4);
  CHECK(g[5] == 1e5);
  CHECK(g.back() == 1e6);
  CHECK(parse_grid("list:10,20.5,1e3") == std::vector<double>{10, 20.5, 1000});
  CHECK(default_grid(5e4) == std::vector<double>{10, 100, 1000, 10000, 50000});
  CHECK(default_grid(1) == std::vector<double>{1});
  CHECK_THROWS(parse_grid("list:10,5"));
  CHECK_THROWS(parse_grid("list:0.5,5"));
  CHECK_THROWS(parse_grid("log:1e4:1e3:5"));
  CHECK_THROWS(parse_grid("log:1e4:1e6:0"));
  CHECK_THROWS(parse_grid("log:1e4:1e6"));
  CHECK_THROWS(parse_grid("lin:1:2:3"));
  CHECK_THROWS(parse_grid("list:1,x"));
}

TEST_CASE("convergence report") {
  MomentSeries c;
  c.grid = {10, 100, 1000, 10000};
  c.normalized = {0.5, 0.5, 0.5, 0.5};
  CHECK(convergence_report(c).slope == doctest::Approx(0.0).epsilon(1e-12));
  c.limit = 0.5;
  CHECK(convergence_report(c).points_used == 0);
  const auto s = correlation_integral(1, 1, 1e7, {1e4, 1e5, 1e6, 1e7});
  CHECK(convergence_report(s).slope < 0);
  c.grid.pop_back();
  c.normalized.pop_back();
  CHECK_THROWS(convergence_report(c));
}

TEST_CASE("series output") {
  const auto s = correlation_integral(1, 2, 1e4, {1e3, 1e4});
  const auto j = nlohmann::json::parse(to_json(s));
  CHECK(j["a"] == 1);
  CHECK(j["b"] == 2);
  CHECK(j["theta"].is_null());
  CHECK(j["grid"].size() == 2);
  CHECK(j["limit"].get<double>() == s.limit.value());
  CHECK(j["relative_error"].size() == 2);
  CHECK_FALSE(j.contains("wall_seconds"));
  CHECK(nlohmann::json::parse(to_json(s, true)).contains("wall_seconds"));
  CHECK(j["normalized"][1].get<double>() == s.normalized[1]);
  const std::string csv = to_csv(s);
  CHECK(csv.rfind("X,integral,normalized,limit,relative_error\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const auto th = theta_correlation(std::sqrt(2.0), 1e4, {10, 100, 1000, 1e4});
  const auto jt = nlohmann::json::parse(to_json(th));
  CHECK(jt["b"].is_null());
  CHECK(jt["limit"].is_null());
  CHECK(jt["relative_error"].is_null());
  CHECK(jt.contains("decay_slope"));
}

TEST_CASE("property: random scales keep symmetry and chunk invariance") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<u64> ab(1, 7);
  std::uniform_real_distribution<double> xs(50.0, 20000.0);
  for (int i = 0; i < 25; ++i) {
    const u64 a = ab(rng), b = ab(rng);
    const double X = xs(rng);
    const double X1 = 1.0 + (X - 1.0) * std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const Scale s1 = Scale::divide_by(a), s2 = Scale::divide_by(b);
    const double whole = integrate_product(s1, s2, 1.0, X);
    CHECK(whole == integrate_product(s2, s1, 1.0, X));
    const double split = integrate_product(s1, s2, 1.0, X1) + integrate_product(s1, s2, X1, X);
    const double scale = integrate_product(s1, s1, 1.0, X) + integrate_product(s2, s2, 1.0, X);
    CHECK_MESSAGE(std::fabs(split - whole) <= 1e-9 * scale, "a=" << a << " b=" << b << " X=" << X);
  }
}
