#pragma once

// Acceptance suite: eleven end-to-end checks, each printed as one PASS/FAIL line.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace divcorr {

struct AcceptanceOptions {
  /// Worker threads for the single-run checks.
  unsigned threads = 1;
  /// Thread count compared against one thread in the determinism check.
  unsigned parallel_threads = 8;
  std::uint64_t seed = 20240607;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

constexpr int kCriterionCount = 11;

/// Runs one check (1..11). Exceptions inside a check become a FAIL with the message.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts = {});

/// "PASS  3  <title>: <detail> (<seconds> s)".
std::string format_result(const CriterionResult& r);

/// Runs the given checks in order, printing each line as it completes; true if all pass.
bool run_acceptance(const std::vector<int>& ids, const AcceptanceOptions& opts, std::ostream& os);

/// Tail of sum_{n>N} tau(cn) tau(dn) n^{-s} from a cubic-in-log fit of the
/// summatory function A(x) = sum_{n<=x} tau(cn) tau(dn) over [N/1000, N].
struct TailEstimate {
  double partial = 0;     // sum_{n<=N}
  double tail = 0;        // estimated sum_{n>N}
  double fit_error = 0;   // bound on the tail error implied by the fit residual
};
TailEstimate tau_correlation_tail(std::uint64_t c, std::uint64_t d, double s, std::uint64_t N);

}  // namespace divcorr
