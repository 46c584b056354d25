#include "divcorr/mf_json.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace divcorr {

namespace {

using nlohmann::json;

std::string line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

u64 positive_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw SpecFormatError("field '" + field + "' must be an integer");
  if (j.is_number_unsigned()) {
    const u64 v = j.get<u64>();
    if (v == 0) throw SpecFormatError("field '" + field + "' must be positive");
    return v;
  }
  const auto v = j.get<std::int64_t>();
  if (v <= 0) throw SpecFormatError("field '" + field + "' must be positive");
  return static_cast<u64>(v);
}

mpq_class rational_field(const json& entry, const char* key, const std::string& path,
                         bool allow_decimal) {
  if (!entry.contains(key)) {
    if (std::string(key) == "im") return 0;
    throw SpecFormatError("missing field '" + path + "." + key + "'");
  }
  const json& v = entry.at(key);
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>(), allow_decimal);
    if (v.is_number_integer()) return mpq_class(v.get<long>());
    if (v.is_number_float() && allow_decimal) return mpq_class(v.get<double>());
  } catch (const std::invalid_argument& e) {
    throw SpecFormatError("field '" + path + "." + key + "': " + e.what());
  }
  throw SpecFormatError("field '" + path + "." + key + "' must be a \"num/den\" string");
}

}  // namespace

ParsedMfSpec parse_mf_json(std::string_view text, bool allow_decimal) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SpecFormatError("JSON syntax error at " + line_of(text, e.byte ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!doc.is_object()) throw SpecFormatError("top level must be an object");
  if (!doc.contains("M")) throw SpecFormatError("missing field 'M'");
  if (!doc.contains("values")) throw SpecFormatError("missing field 'values'");
  ParsedMfSpec out;
  out.M = positive_int(doc.at("M"), "M");
  const json& values = doc.at("values");
  if (!values.is_array()) throw SpecFormatError("field 'values' must be an array");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string path = "values[" + std::to_string(i) + "]";
    const json& e = values[i];
    if (!e.is_object()) throw SpecFormatError("'" + path + "' must be an object");
    for (const char* key : {"p", "k"}) {
      if (!e.contains(key)) throw SpecFormatError("missing field '" + path + "." + key + "'");
    }
    TableEntry t;
    t.p = positive_int(e.at("p"), path + ".p");
    const u64 k = positive_int(e.at("k"), path + ".k");
    if (k > 64) throw SpecFormatError("field '" + path + ".k' is too large");
    t.k = static_cast<unsigned>(k);
    t.value = ExactScalar(rational_field(e, "re", path, allow_decimal),
                          rational_field(e, "im", path, allow_decimal));
    out.entries.push_back(std::move(t));
  }
  return out;
}

std::string mf_to_json(const PeriodicMF& f, int indent) {
  json doc;
  doc["M"] = f.period();
  doc["values"] = json::array();
  for (const auto& e : f.entries()) {
    doc["values"].push_back({{"p", e.p},
                             {"k", e.k},
                             {"re", rational_to_string(e.value.re())},
                             {"im", rational_to_string(e.value.im())}});
  }
  return doc.dump(indent);
}

PeriodicMF load_periodic_mf(const std::string& path, const ValidationOptions& opts) {
  std::ifstream in(path);
  if (!in) throw SpecFormatError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto spec = parse_mf_json(ss.str(), opts.tolerance_mode);
  return make_periodic_mf(spec.M, spec.entries, opts);
}

}  // namespace divcorr
