#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "divcorr/moments.hpp"
#include "divcorr/special_values.hpp"

namespace divcorr {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    throw std::invalid_argument("grid: cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

void check_grid(const std::vector<double>& grid, double X) {
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 1.0)) throw std::invalid_argument("grid point " + std::to_string(grid[i]) + " is below 1");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  }
  if (grid.back() > X) {
    throw std::invalid_argument("grid point " + std::to_string(grid.back()) + " exceeds X=" + std::to_string(X));
  }
}

std::vector<double> resolve_grid(std::vector<double> grid, double X) {
  if (!(X >= 1.0)) throw std::invalid_argument("X must be >= 1");
  if (grid.empty()) grid = default_grid(X);
  check_grid(grid, X);
  return grid;
}

void fill_normalized(MomentSeries& s) {
  s.normalized.resize(s.grid.size());
  for (std::size_t i = 0; i < s.grid.size(); ++i) s.normalized[i] = s.integral[i] / std::pow(s.grid[i], 1.5);
  if (s.limit && *s.limit != 0.0) {
    std::vector<double> rel(s.grid.size());
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = std::fabs(s.normalized[i] - *s.limit) / std::fabs(*s.limit);
    s.relative_error = std::move(rel);
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<double> out;
  if (spec.rfind("log:", 0) == 0) {
    std::vector<std::string_view> parts;
    std::string_view rest = spec.substr(4);
    for (std::size_t pos; (pos = rest.find(':')) != std::string_view::npos; rest = rest.substr(pos + 1)) {
      parts.push_back(rest.substr(0, pos));
    }
    parts.push_back(rest);
    if (parts.size() != 3) throw std::invalid_argument("grid: expected log:<lo>:<hi>:<points-per-decade>");
    const double lo = parse_number(parts[0], "lo");
    const double hi = parse_number(parts[1], "hi");
    const double ppd = parse_number(parts[2], "points-per-decade");
    if (!(ppd >= 1) || ppd != std::floor(ppd)) throw std::invalid_argument("grid: points-per-decade must be a positive integer");
    if (!(lo >= 1.0) || !(hi >= lo)) throw std::invalid_argument("grid: need 1 <= lo <= hi");
    const double e0 = std::log10(lo);
    const long steps = std::lround(ppd * (std::log10(hi) - e0));
    for (long k = 0; k < steps; ++k) {
      const double v = k == 0 ? lo : std::pow(10.0, e0 + static_cast<double>(k) / ppd);
      if (v < hi) out.push_back(v);
    }
    out.push_back(hi);
  } else if (spec.rfind("list:", 0) == 0) {
    std::string_view rest = spec.substr(5);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest = rest.substr(pos + 1)) {
      out.push_back(parse_number(rest.substr(0, pos), "value"));
    }
    out.push_back(parse_number(rest, "value"));
  } else {
    throw std::invalid_argument("grid: unknown spec '" + std::string(spec) +
                                "' (use log:<lo>:<hi>:<points-per-decade> or list:<x1>,<x2>,...)");
  }
  check_grid(out, out.back());
  return out;
}

std::vector<double> default_grid(double X) {
  std::vector<double> out;
  for (double v = 10.0; v < X; v *= 10.0) out.push_back(v);
  out.push_back(X);
  return out;
}

MomentSeries correlation_integral(u64 a, u64 b, double X, std::vector<double> grid, const IntegrationOptions& opts) {
  if (a == 0 || b == 0) throw std::invalid_argument("correlation_integral: a and b must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  MomentSeries s;
  s.kind = "correlation";
  s.a = a;
  s.b = b;
  s.grid = resolve_grid(std::move(grid), X);
  s.integral = integrate_product_on_grid(Scale::divide_by(a), Scale::divide_by(b), s.grid, opts);
  s.limit = correlation_limit(a, b).value;
  fill_normalized(s);
  s.wall_seconds = seconds_since(t0);
  return s;
}

MomentSeries theta_correlation(double theta, double X, std::vector<double> grid,
                               std::optional<std::pair<u64, u64>> rational, const IntegrationOptions& opts) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be positive and finite");
  const auto t0 = std::chrono::steady_clock::now();
  MomentSeries s;
  s.kind = "theta";
  s.a = 1;
  s.theta = theta;
  s.grid = resolve_grid(std::move(grid), X);
  if (rational) {
    auto [p, q] = *rational;
    if (p == 0 || q == 0) throw std::invalid_argument("rational theta: p and q must be positive");
    const u64 g = gcd(p, q);
    p /= g;
    q /= g;
    const double r = static_cast<double>(p) / static_cast<double>(q);
    if (std::fabs(r - theta) > 1e-12 * theta) {
      throw std::invalid_argument("declared rational " + std::to_string(p) + "/" + std::to_string(q) +
                                  " does not match theta");
    }
    s.limit = std::sqrt(static_cast<double>(p)) * correlation_limit(p, q).value;
  }
  const Scale s2 = theta == 1.0 ? Scale::divide_by(1) : Scale::multiply_by(theta);
  s.integral = integrate_product_on_grid(Scale::divide_by(1), s2, s.grid, opts);
  fill_normalized(s);
  if (!rational && s.grid.size() >= 4) s.decay_slope = convergence_report(s).slope;
  s.wall_seconds = seconds_since(t0);
  return s;
}

MomentSeries second_moment_integral(const PeriodicMF& f1, const PeriodicMF& f2, double X, std::vector<double> grid,
                                    const IntegrationOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  MomentSeries s;
  s.kind = "second_moment";
  s.a = f1.period();
  s.b = f2.period();
  s.grid = resolve_grid(std::move(grid), X);
  s.integral = second_moment_running(f1, f2, s.grid, opts);
  s.limit = second_moment_limit(f1, f2).value;
  fill_normalized(s);
  s.wall_seconds = seconds_since(t0);
  return s;
}

ConvergenceReport convergence_report(const MomentSeries& series) {
  if (series.grid.size() < 4) throw std::invalid_argument("convergence_report: need at least 4 grid points");
  const double limit = series.limit.value_or(0.0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  ConvergenceReport out;
  for (std::size_t i = 0; i < series.grid.size(); ++i) {
    const double r = std::fabs(series.normalized[i] - limit);
    if (!(r >= 1e-14)) continue;
    const double x = std::log(series.grid[i]);
    const double y = std::log(r);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++out.points_used;
  }
  if (out.points_used >= 2) {
    const double n = static_cast<double>(out.points_used);
    const double den = n * sxx - sx * sx;
    if (den > 0) out.slope = (n * sxy - sx * sy) / den;
  }
  return out;
}

std::string to_json(const MomentSeries& s, bool include_timing, int indent) {
  nlohmann::ordered_json j;
  j["kind"] = s.kind;
  j["a"] = s.a;
  j["b"] = s.b ? nlohmann::ordered_json(*s.b) : nlohmann::ordered_json(nullptr);
  j["theta"] = s.theta ? nlohmann::ordered_json(*s.theta) : nlohmann::ordered_json(nullptr);
  j["grid"] = s.grid;
  j["integral"] = s.integral;
  j["normalized"] = s.normalized;
  j["limit"] = s.limit ? nlohmann::ordered_json(*s.limit) : nlohmann::ordered_json(nullptr);
  j["relative_error"] = s.relative_error ? nlohmann::ordered_json(*s.relative_error) : nlohmann::ordered_json(nullptr);
  if (s.decay_slope) j["decay_slope"] = *s.decay_slope;
  if (include_timing) j["wall_seconds"] = s.wall_seconds;
  return j.dump(indent) + "\n";
}

std::string to_csv(const MomentSeries& s) {
  std::ostringstream os;
  os << "X,integral,normalized,limit,relative_error\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    os << num(s.grid[i]) << ',' << num(s.integral[i]) << ',' << num(s.normalized[i]) << ','
       << (s.limit ? num(*s.limit) : "") << ',' << (s.relative_error ? num((*s.relative_error)[i]) : "") << '\n';
  }
  return os.str();
}

}  // namespace divcorr
