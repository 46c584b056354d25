#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "divcorr/acceptance.hpp"
#include "divcorr/divisor_delta.hpp"
#include "divcorr/exact.hpp"
#include "divcorr/mf_json.hpp"
#include "divcorr/moments.hpp"
#include "divcorr/parallel.hpp"
#include "divcorr/periodic_mf.hpp"
#include "divcorr/quadforms.hpp"
#include "divcorr/special_values.hpp"

using namespace divcorr;
using json = nlohmann::ordered_json;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string format = "auto";
  std::string out;
  unsigned threads = 0;
  std::uint64_t seed = 20240607;
  double tolerance = 0;
  bool timing = false;
  bool quiet = false;
};

std::string resolved_format(const Global& g, const std::string& fallback) {
  if (g.format == "auto") return fallback;
  return g.format;
}

void emit(const Global& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw UsageError("cannot write '" + g.out + "'");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ValidationOptions validation_options(const Global& g) {
  ValidationOptions v;
  if (g.tolerance > 0) {
    v.tolerance_mode = true;
    v.tolerance = g.tolerance;
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecFormatError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

IntegrationOptions integration_options(const Global& g, double X) {
  IntegrationOptions io;
  io.threads = resolve_threads(g.threads);
  io.max_X = std::max(1e9, X);
  if (!g.quiet) {
    auto last = std::make_shared<int>(-1);
    auto mu = std::make_shared<std::mutex>();
    io.progress = [last, mu](double f) {
      const int pct = static_cast<int>(f * 10) * 10;
      std::lock_guard<std::mutex> lock(*mu);
      if (pct > *last) {
        *last = pct;
        std::cerr << "progress " << pct << "%\n";
      }
    };
  }
  return io;
}

std::vector<double> grid_from(const std::string& spec, double X) {
  if (spec.empty()) return default_grid(X);
  return parse_grid(spec);
}

// Commands whose output is a data record: json (default) or csv.
std::string data_format(const Global& g, const char* command) {
  const std::string f = resolved_format(g, "json");
  if (f == "text") throw UsageError(std::string(command) + ": --format text is not supported (use json or csv)");
  return f;
}

std::string series_text(const MomentSeries& s) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %-16s %-16s %s\n", "X", "normalized", "limit", "relative_error");
  out += buf;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-14.6g %-16.9g %-16s %s\n", s.grid[i], s.normalized[i],
                  s.limit ? num(*s.limit).c_str() : "-",
                  s.relative_error ? num((*s.relative_error)[i]).c_str() : "-");
    out += buf;
  }
  if (s.decay_slope) {
    std::snprintf(buf, sizeof buf, "decay slope %.4g\n", *s.decay_slope);
    out += buf;
  }
  return out;
}

void emit_series(const Global& g, const MomentSeries& s) {
  const std::string f = resolved_format(g, "json");
  emit(g, f == "csv" ? to_csv(s) : f == "text" ? series_text(s) : to_json(s, g.timing));
}

std::vector<u64> parse_set(const std::string& text) {
  std::vector<u64> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("cannot parse set element '" + item + "'");
    }
  }
  return out;
}

MultiplicativeWeight parse_weight(const std::string& spec) {
  if (spec == "phi") return MultiplicativeWeight::correlation_phi();
  if (spec == "phi-star") return MultiplicativeWeight::correlation_phi_star();
  if (spec.rfind("power:", 0) == 0) {
    try {
      return MultiplicativeWeight::power(std::stod(spec.substr(6)));
    } catch (const std::invalid_argument&) {
      throw UsageError("cannot parse weight exponent in '" + spec + "'");
    }
  }
  throw UsageError("unknown weight '" + spec + "' (use power:<e>, phi or phi-star)");
}

json scalar_json(const ExactScalar& v) { return json{{"re", rational_to_string(v.re())}, {"im", rational_to_string(v.im())}}; }

json report_json(const MfReport& r) {
  json j;
  j["period"] = r.period;
  j["valid"] = r.valid();
  j["witness"] = r.witness ? json(*r.witness) : json(nullptr);
  j["violations"] = r.violations;
  j["advisories"] = r.advisories;
  json res = json::object();
  for (const auto& [q, v] : r.condition_i_residual) res[std::to_string(q)] = v;
  j["condition_i_residual"] = res;
  return j;
}

std::string report_text(const MfReport& r) {
  std::ostringstream os;
  if (r.valid()) {
    os << "valid, witness q=" << *r.witness << "\n";
  } else {
    os << "invalid\n";
    for (const auto& v : r.violations) os << "  violation: " << v << "\n";
  }
  for (const auto& a : r.advisories) os << "  advisory: " << a << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Divisor-problem correlations, moments and GCD quadratic forms"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--format", g.format, "Output format: json, csv or text (default depends on the command)")
      ->check(CLI::IsMember({"auto", "json", "csv", "text"}));
  app.add_option("--out", g.out, "Write the report to this path instead of stdout");
  app.add_option("--threads", g.threads,
                 "Worker threads (default: $DIVCORR_THREADS, else the number of logical cores)");
  app.add_option("--seed", g.seed, "Seed for randomized checks");
  app.add_option("--tolerance", g.tolerance,
                 "Accept decimal function values and compare identities within this tolerance");
  app.add_flag("--timing", g.timing, "Include wall-clock seconds in JSON series output");
  app.add_flag("--quiet", g.quiet, "Suppress progress lines on stderr");

  int code = kOk;

  // delta
  auto* cmd_delta = app.add_subcommand("delta", "Print D(x) and Delta(x) for one x or a range lo:hi:step");
  double delta_x = 0;
  std::string delta_range;
  auto* ox = cmd_delta->add_option("--x", delta_x, "Point x >= 1");
  auto* orange = cmd_delta->add_option("--range", delta_range, "lo:hi:step");
  ox->excludes(orange);

  // mf
  auto* cmd_mf = app.add_subcommand("mf", "Periodic multiplicative functions");
  cmd_mf->require_subcommand(1);
  std::string mf_file;
  auto* cmd_mf_validate = cmd_mf->add_subcommand("validate", "Validate a function-spec JSON file");
  cmd_mf_validate->add_option("--file", mf_file, "Function-spec JSON")->required();
  auto* cmd_mf_show = cmd_mf->add_subcommand("show", "Print a validated function and its values on one period");
  cmd_mf_show->add_option("--file", mf_file, "Function-spec JSON")->required();

  // convolve
  std::string f1_file, f2_file;
  auto* cmd_convolve = app.add_subcommand("convolve", "Coefficients g = f1*f2*mu*mu on the divisors of M1 M2");
  cmd_convolve->add_option("--f1", f1_file)->required();
  cmd_convolve->add_option("--f2", f2_file)->required();

  // limit
  u64 lim_a = 1, lim_b = 1;
  auto* cmd_limit = app.add_subcommand("limit", "Closed-form correlation constant c_{a,b}");
  cmd_limit->add_option("--a", lim_a)->required()->check(CLI::PositiveNumber);
  cmd_limit->add_option("--b", lim_b)->required()->check(CLI::PositiveNumber);

  // correlate
  u64 cor_a = 1, cor_b = 1;
  double X = 1e6;
  std::string grid_spec;
  const std::string grid_help = "log:<lo>:<hi>:<points-per-decade> or list:<x1>,<x2>,... (default: 10, 100, ..., X)";
  auto* cmd_correlate = app.add_subcommand("correlate", "Normalized integral of Delta(x/a) Delta(x/b)");
  cmd_correlate->add_option("--a", cor_a)->required()->check(CLI::PositiveNumber);
  cmd_correlate->add_option("--b", cor_b)->required()->check(CLI::PositiveNumber);
  cmd_correlate->add_option("--X", X, "Upper limit")->required();
  cmd_correlate->add_option("--grid", grid_spec, grid_help);

  // correlate-theta
  double theta = 1;
  std::string rational;
  auto* cmd_theta = app.add_subcommand("correlate-theta", "Normalized integral of Delta(x) Delta(theta x)");
  cmd_theta->add_option("--theta", theta, "theta > 0, as a double")->required();
  cmd_theta->add_option("--rational", rational, "Declare theta = p/q to attach the limit");
  cmd_theta->add_option("--X", X, "Upper limit")->required();
  cmd_theta->add_option("--grid", grid_spec, grid_help);

  // second-moment
  auto* cmd_sm = app.add_subcommand("second-moment", "Normalized integral of |sum_{n<=x} (f1*f2)(n)|^2");
  cmd_sm->add_option("--f1", f1_file)->required();
  cmd_sm->add_option("--f2", f2_file)->required();
  cmd_sm->add_option("--X", X, "Upper limit")->required();
  cmd_sm->add_option("--grid", grid_spec, grid_help);

  // quadform
  auto* cmd_q = app.add_subcommand("quadform", "GCD/LCM quadratic forms");
  cmd_q->require_subcommand(1);
  u64 qN = 0;
  std::string qset, qweight = "power:-0.75";
  u64 qp = 2;
  unsigned qK = 2;
  auto* cmd_pd = cmd_q->add_subcommand("check-pd", "Sylvester certificate for (c_{a,b}) over the divisors of N");
  auto* pd_n = cmd_pd->add_option("--N", qN, "Index set = divisors of N");
  auto* pd_f1 = cmd_pd->add_option("--f1", f1_file, "Use N = M1 M2 from two function specs");
  cmd_pd->add_option("--f2", f2_file);
  pd_n->excludes(pd_f1);
  auto* cmd_sel = cmd_q->add_subcommand("selberg-det", "Selberg determinant against direct elimination");
  cmd_sel->add_option("--N", qN, "Index set = divisors of N");
  cmd_sel->add_option("--set", qset, "Comma-separated divisor-closed set");
  cmd_sel->add_option("--weight", qweight, "power:<e> (completely multiplicative)");
  auto* cmd_pa = cmd_q->add_subcommand("prop-a", "Conjugation of the local block by U_K");
  cmd_pa->add_option("--p", qp)->required();
  cmd_pa->add_option("--K", qK)->required()->check(CLI::Range(2u, 64u));
  auto* cmd_tc = cmd_q->add_subcommand("tensor-check", "Full form against the product of local forms");
  cmd_tc->add_option("--N", qN, "Index set = divisors of N (default 60)");
  cmd_tc->add_option("--set", qset, "Comma-separated set");
  cmd_tc->add_option("--weight", qweight, "power:<e>, phi or phi-star");

  // selftest
  std::vector<int> only;
  auto* cmd_self = app.add_subcommand("selftest", "Run the acceptance suite");
  cmd_self->add_option("--only", only, "Criterion numbers to run (default: all)")->check(CLI::Range(1, kCriterionCount));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*cmd_delta) {
      std::vector<double> xs;
      if (!delta_range.empty()) {
        const auto parts = parse_grid("list:" + [&] {
          std::string s = delta_range;
          for (char& c : s)
            if (c == ':') c = ',';
          return s;
        }());
        if (parts.size() != 3) throw UsageError("--range expects lo:hi:step");
        const double lo = parts[0], hi = parts[1], step = parts[2];
        if (!(step > 0) || hi < lo) throw UsageError("--range expects lo <= hi and step > 0");
        const auto n = static_cast<u64>(std::floor((hi - lo) / step + 1e-9));
        if (n > 10000000) throw UsageError("--range produces too many points");
        for (u64 i = 0; i <= n; ++i) xs.push_back(lo + static_cast<double>(i) * step);
      } else if (ox->count()) {
        xs.push_back(delta_x);
      } else {
        throw UsageError("delta: give --x or --range");
      }
      if (data_format(g, "delta") == "csv") {
        std::string out = "x,D,delta\n";
        for (double x : xs) {
          const double d = delta(x);
          out += num(x) + "," + std::to_string(divisor_summatory(static_cast<u64>(std::floor(x)))) + "," + num(d) + "\n";
        }
        emit(g, out);
      } else {
        json arr = json::array();
        for (double x : xs) {
          const double d = delta(x);
          arr.push_back({{"x", x}, {"D", divisor_summatory(static_cast<u64>(std::floor(x)))}, {"delta", d}});
        }
        emit(g, dump(xs.size() == 1 ? arr[0] : arr));
      }
    } else if (*cmd_mf_validate) {
      const auto spec = parse_mf_json(read_file(mf_file), g.tolerance > 0);
      const auto rep = validate_periodic_mf(spec.M, spec.entries, validation_options(g));
      emit(g, resolved_format(g, "text") == "json" ? dump(report_json(rep)) : report_text(rep));
      if (!rep.valid()) code = kValidation;
    } else if (*cmd_mf_show) {
      const PeriodicMF f = load_periodic_mf(mf_file, validation_options(g));
      if (data_format(g, "mf show") == "csv") {
        std::string out = "n,re,im\n";
        for (u64 n = 1; n <= f.period(); ++n) {
          const auto v = f(n);
          out += std::to_string(n) + "," + rational_to_string(v.re()) + "," + rational_to_string(v.im()) + "\n";
        }
        emit(g, out);
      } else {
        json j = json::parse(mf_to_json(f));
        json vals = json::array();
        for (u64 n = 1; n <= std::min<u64>(f.period(), 1000); ++n) vals.push_back(scalar_json(f(n)));
        j["witness"] = f.witness();
        j["period_values"] = vals;
        emit(g, dump(j));
      }
    } else if (*cmd_convolve) {
      const auto f1 = load_periodic_mf(f1_file, validation_options(g));
      const auto f2 = load_periodic_mf(f2_file, validation_options(g));
      const auto gc = g_coefficients(f1, f2);
      if (data_format(g, "convolve") == "csv") {
        std::string out = "n,re,im\n";
        for (const auto& [n, v] : gc.values)
          out += std::to_string(n) + "," + rational_to_string(v.re()) + "," + rational_to_string(v.im()) + "\n";
        emit(g, out);
      } else {
        json arr = json::array();
        for (const auto& [n, v] : gc.values) {
          arr.push_back(json{{"n", n}, {"re", rational_to_string(v.re())}, {"im", rational_to_string(v.im())}});
        }
        emit(g, dump(json{{"modulus", gc.modulus}, {"g", arr}}));
      }
    } else if (*cmd_limit) {
      const auto c = correlation_limit(lim_a, lim_b);
      if (data_format(g, "limit") == "csv") {
        emit(g, "a,b,lambda,c,d,value\n" + std::to_string(c.a) + "," + std::to_string(c.b) + "," +
                    std::to_string(c.lambda) + "," + std::to_string(c.c) + "," + std::to_string(c.d) + "," +
                    num(c.value) + "\n");
      } else {
        emit(g, dump(json{{"a", c.a}, {"b", c.b}, {"lambda", c.lambda}, {"c", c.c}, {"d", c.d}, {"value", c.value}}));
      }
    } else if (*cmd_correlate) {
      const auto s = correlation_integral(cor_a, cor_b, X, grid_from(grid_spec, X), integration_options(g, X));
      emit_series(g, s);
    } else if (*cmd_theta) {
      std::optional<std::pair<u64, u64>> pq;
      if (!rational.empty()) {
        const auto slash = rational.find('/');
        if (slash == std::string::npos) throw UsageError("--rational expects p/q");
        try {
          pq = std::make_pair(static_cast<u64>(std::stoull(rational.substr(0, slash))),
                              static_cast<u64>(std::stoull(rational.substr(slash + 1))));
        } catch (const std::exception&) {
          throw UsageError("--rational expects p/q with positive integers");
        }
      }
      const auto s = theta_correlation(theta, X, grid_from(grid_spec, X), pq, integration_options(g, X));
      emit_series(g, s);
    } else if (*cmd_sm) {
      const auto f1 = load_periodic_mf(f1_file, validation_options(g));
      const auto f2 = load_periodic_mf(f2_file, validation_options(g));
      const auto s = second_moment_integral(f1, f2, X, grid_from(grid_spec, X), integration_options(g, X));
      emit_series(g, s);
    } else if (*cmd_pd) {
      PdCertificate c;
      if (!f1_file.empty()) {
        if (f2_file.empty()) throw UsageError("check-pd: --f1 needs --f2");
        c = pd_certificate(load_periodic_mf(f1_file, validation_options(g)),
                           load_periodic_mf(f2_file, validation_options(g)));
      } else {
        if (qN == 0) throw UsageError("check-pd: give --N or --f1/--f2");
        c = pd_certificate(qN);
      }
      emit(g, data_format(g, "check-pd") == "csv" ? pd_certificate_csv(c) : pd_certificate_json(c) + "\n");
    } else if (*cmd_sel) {
      std::vector<u64> S;
      if (!qset.empty()) {
        try {
          S = DivisorClosedSet(parse_set(qset)).elements();
        } catch (const std::invalid_argument& e) {
          throw ValidationFailure(e.what());
        }
      } else {
        if (qN == 0) throw UsageError("selberg-det: give --N or --set");
        S = divisors(qN);
      }
      const auto w = parse_weight(qweight);
      const double sel = selberg_determinant(S, w);
      const double direct = determinant(build_matrix(S, w).entries);
      const double r = std::fabs(sel - direct) / std::fabs(direct);
      if (data_format(g, "selberg-det") == "csv") {
        emit(g, "selberg,direct,relative_difference\n" + num(sel) + "," + num(direct) + "," + num(r) + "\n");
      } else {
        emit(g, dump(json{{"index_set", S}, {"weight", w.name}, {"selberg", sel}, {"direct", direct},
                          {"relative_difference", r}}));
      }
    } else if (*cmd_pa) {
      const auto r = check_prop_A(qK, qp);
      const std::string f = resolved_format(g, "text");
      if (f == "json") {
        emit(g, dump(json{{"p", qp}, {"K", qK}, {"max_deviation", r.max_deviation}, {"worst_i", r.worst_i},
                          {"worst_j", r.worst_j}}));
      } else if (f == "csv") {
        emit(g, "p,K,max_deviation,worst_i,worst_j\n" + std::to_string(qp) + "," + std::to_string(qK) + "," +
                    num(r.max_deviation) + "," + std::to_string(r.worst_i) + "," + std::to_string(r.worst_j) + "\n");
      } else {
        char buf[160];
        std::snprintf(buf, sizeof buf, "p=%llu K=%u: max deviation %.3e %s 1e-12 (at i=%u, j=%u)\n",
                      static_cast<unsigned long long>(qp), qK, r.max_deviation,
                      r.max_deviation <= 1e-12 ? "<=" : ">", r.worst_i, r.worst_j);
        emit(g, buf);
      }
      if (r.max_deviation > 1e-12) code = kValidation;
    } else if (*cmd_tc) {
      const std::vector<u64> S = !qset.empty() ? parse_set(qset) : divisors(qN == 0 ? 60 : qN);
      const auto w = parse_weight(qweight);
      std::mt19937_64 rng(g.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      SplitVector x;
      for (u64 a : S) {
        const auto f = factorize(a);
        if (f.size() == 1) x[a] = u(rng);
      }
      TensorCheck t;
      try {
        t = tensor_factor_check(S, w, x);
      } catch (const std::invalid_argument& e) {
        throw ValidationFailure(e.what());
      }
      const double r = std::fabs(t.lhs - t.rhs) / std::max(std::fabs(t.rhs), 1e-300);
      if (data_format(g, "tensor-check") == "csv") {
        emit(g, "lhs,rhs,relative_difference\n" + num(t.lhs) + "," + num(t.rhs) + "," + num(r) + "\n");
      } else {
        emit(g, dump(json{{"index_set", S}, {"weight", w.name}, {"lhs", t.lhs}, {"rhs", t.rhs},
                          {"relative_difference", r}}));
      }
    } else if (*cmd_self) {
      AcceptanceOptions ao;
      ao.threads = resolve_threads(g.threads);
      ao.seed = g.seed;
      std::vector<int> ids = only;
      if (ids.empty())
        for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
      std::ostringstream os;
      const bool ok = run_acceptance(ids, ao, g.out.empty() ? std::cout : os);
      if (!g.out.empty()) emit(g, os.str());
      if (!ok) code = kValidation;
    }
  } catch (const SpecFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidPeriodicFunction& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return code;
}
