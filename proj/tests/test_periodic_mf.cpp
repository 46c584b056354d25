#include <doctest.h>

#include <fstream>
#include <string>

#include "divcorr/mf_json.hpp"
#include "divcorr/periodic_mf.hpp"

using namespace divcorr;

#ifndef DIVCORR_TEST_DATA
#define DIVCORR_TEST_DATA "tests/data"
#endif

namespace {

// Direct Dirichlet convolution on all n <= N from values at every n.
std::vector<ExactScalar> convolve_direct(const std::vector<ExactScalar>& f, const std::vector<ExactScalar>& g) {
  std::vector<ExactScalar> h(f.size(), ExactScalar(0));
  for (std::size_t d = 1; d < f.size(); ++d)
    for (std::size_t e = 1; d * e < f.size(); ++e) h[d * e] += f[d] * g[e];
  return h;
}

std::vector<ExactScalar> table_of(const std::function<ExactScalar(u64)>& f, std::size_t n) {
  std::vector<ExactScalar> v(n + 1, ExactScalar(0));
  for (std::size_t k = 1; k <= n; ++k) v[k] = f(k);
  return v;
}

}  // namespace

TEST_CASE("parity function is valid with witness 2") {
  const PeriodicMF f = parity_function();
  CHECK(f.period() == 2);
  CHECK(f.witness() == 2);
  for (u64 n = 1; n <= 40; ++n) CHECK(f(n) == ExactScalar(n % 2 ? 1 : -1));
}

TEST_CASE("prime periodic functions") {
  for (u64 q : {3, 5, 7, 11}) {
    const PeriodicMF f = prime_periodic_function(q);
    CHECK(f.witness() == q);
    ExactScalar s = 0;
    for (u64 n = 1; n <= q; ++n) s += f(n);
    CHECK(s.is_zero());
  }
  CHECK_THROWS(prime_periodic_function(6));
}

TEST_CASE("validation reports each failure") {
  SUBCASE("missing entry") {
    const auto r = validate_periodic_mf(6, {{2, 1, ExactScalar(-1)}});
    CHECK_FALSE(r.valid());
    CHECK(r.violations.front().find("missing table entry (p=3") != std::string::npos);
  }
  SUBCASE("entry outside M") {
    const auto r = validate_periodic_mf(2, {{2, 1, ExactScalar(-1)}, {3, 1, ExactScalar(1)}});
    CHECK_FALSE(r.valid());
  }
  SUBCASE("condition i fails") {
    const auto r = validate_periodic_mf(2, {{2, 1, ExactScalar(mpq_class(1, 2))}});
    CHECK_FALSE(r.valid());
    CHECK_FALSE(r.witness.has_value());
    CHECK(r.condition_i_residual.at(2) == doctest::Approx(1.5));
  }
  SUBCASE("make throws with the report") {
    try {
      make_periodic_mf(2, {{2, 1, ExactScalar(0)}});
      FAIL("expected an exception");
    } catch (const InvalidPeriodicFunction& e) {
      CHECK_FALSE(e.report().valid());
    }
  }
}

TEST_CASE("f(M) = 0 is accepted with an advisory") {
  const auto r = validate_periodic_mf(4, {{2, 1, ExactScalar(-2)}, {2, 2, ExactScalar(0)}});
  CHECK(r.valid());
  REQUIRE(r.advisories.size() == 1);
  CHECK(r.advisories[0] == "f(M) = 0");
}

TEST_CASE("tolerance mode admits approximate values") {
  const std::vector<TableEntry> t{{2, 1, ExactScalar(mpq_class(-1.0000000000001))}};
  CHECK_FALSE(validate_periodic_mf(2, t).valid());
  ValidationOptions o;
  o.tolerance_mode = true;
  o.tolerance = 1e-9;
  CHECK(validate_periodic_mf(2, t, o).valid());
}

TEST_CASE("g coefficients match a direct convolution") {
  const PeriodicMF p = parity_function();
  const PeriodicMF t = prime_periodic_function(3);
  for (const auto& [f1, f2] : {std::pair{&p, &p}, std::pair{&p, &t}, std::pair{&t, &t}}) {
    const auto g = g_coefficients(*f1, *f2);
    const std::size_t N = g.modulus;
    const auto mob = table_of([](u64 n) { return ExactScalar(mu(n)); }, N);
    const auto direct =
        convolve_direct(convolve_direct(convolve_direct(table_of(*f1, N), table_of(*f2, N)), mob), mob);
    for (std::size_t n = 1; n <= N; ++n) {
      if (N % n == 0) {
        CHECK(g.values.at(n) == direct[n]);
      }
    }
  }
  const auto gp = g_coefficients(p, p);
  CHECK(gp.values.at(1) == ExactScalar(1));
  CHECK(gp.values.at(2) == ExactScalar(-4));
  CHECK(gp.values.at(4) == ExactScalar(4));
}

TEST_CASE("dirichlet_convolve names the missing divisor") {
  DivisorMap f{{1, 1}, {2, 1}};
  DivisorMap g{{1, 1}, {2, 1}, {4, 1}};
  CHECK_THROWS_WITH(dirichlet_convolve(f, g, 4), doctest::Contains("missing divisor 4"));
}

TEST_CASE("partial sums are bounded for valid functions") {
  const PeriodicMF t = prime_periodic_function(5);
  for (double x : {1.0, 4.5, 5.0, 17.2, 100.0}) {
    const ExactScalar s = partial_sum(t, x);
    CHECK(std::abs(s.to_complex()) <= 4.0);
  }
  CHECK(partial_sum(t, 0.5).is_zero());
}

TEST_CASE("function-spec JSON") {
  const std::string dir = DIVCORR_TEST_DATA;
  SUBCASE("parity file loads") {
    const PeriodicMF f = load_periodic_mf(dir + "/parity.json");
    CHECK(f.period() == 2);
    CHECK(f.witness() == 2);
  }
  SUBCASE("round trip") {
    const PeriodicMF f = prime_periodic_function(7);
    const auto spec = parse_mf_json(mf_to_json(f));
    CHECK(spec.M == 7);
    REQUIRE(spec.entries.size() == 1);
    CHECK(spec.entries[0].value == ExactScalar(-6));
  }
  SUBCASE("syntax errors carry line and column") {
    CHECK_THROWS_WITH_AS(load_periodic_mf(dir + "/malformed.json"), doctest::Contains("line 4"), SpecFormatError);
  }
  SUBCASE("field errors carry the path") {
    CHECK_THROWS_WITH_AS(load_periodic_mf(dir + "/bad_field.json"), doctest::Contains("values[0].re"),
                         SpecFormatError);
    CHECK_THROWS_WITH_AS(parse_mf_json(R"({"M": 2})"), doctest::Contains("values"), SpecFormatError);
    CHECK_THROWS_WITH_AS(parse_mf_json(R"({"M": "two", "values": []})"), doctest::Contains("M"), SpecFormatError);
  }
  SUBCASE("decimals need tolerance mode") {
    const std::string text = R"({"M": 2, "values": [{"p": 2, "k": 1, "re": "-1.0"}]})";
    CHECK_THROWS_AS(parse_mf_json(text), SpecFormatError);
    CHECK(parse_mf_json(text, true).entries.size() == 1);
  }
  SUBCASE("invalid function is rejected after parsing") {
    CHECK_THROWS_AS(load_periodic_mf(dir + "/not_bounded.json"), InvalidPeriodicFunction);
  }
}
