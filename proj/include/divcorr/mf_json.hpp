#pragma once

// JSON form of a periodic multiplicative function:
//   {"M": int, "values": [{"p": int, "k": int, "re": "num/den", "im": "num/den"}]}

#include <stdexcept>
#include <string>
#include <string_view>

#include "divcorr/periodic_mf.hpp"

namespace divcorr {

/// Malformed document; what() carries the line and/or field path.
class SpecFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParsedMfSpec {
  u64 M = 0;
  std::vector<TableEntry> entries;
};

/// Structural parse only; no validation of conditions i-iii.
ParsedMfSpec parse_mf_json(std::string_view text, bool allow_decimal = false);

std::string mf_to_json(const PeriodicMF& f, int indent = 2);

PeriodicMF load_periodic_mf(const std::string& path, const ValidationOptions& opts = {});

}  // namespace divcorr
