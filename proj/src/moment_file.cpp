#include <fstream>
#include <sstream>

#include "momdiag/moments.hpp"

namespace momdiag {

namespace {

using nlohmann::json;

ExactRational field_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key) || obj[key].is_null()) throw Error(Errc::SchemaError, where + ": missing field '" + key + "'");
  const json& v = obj[key];
  if (!v.is_string()) throw Error(Errc::ParseError, where + "." + key + ": expected a decimal string");
  try {
    return ExactRational::parse(v.get<std::string>());
  } catch (const Error& e) {
    throw Error(Errc::ParseError, where + "." + key + ": " + e.what());
  }
}

bool present(const json& doc, const char* key) { return doc.contains(key) && !doc[key].is_null(); }

MomentProvider build_generator(const json& gen) {
  if (!gen.is_object()) throw Error(Errc::SchemaError, "generator: expected an object");
  if (!gen.contains("kind") || !gen["kind"].is_string()) throw Error(Errc::SchemaError, "generator: missing field 'kind'");
  const std::string kind = gen["kind"].get<std::string>();
  if (kind == "weibull") return weibull_moments(field_number(gen, "beta", "generator"));
  if (kind == "lognormal") return lognormal_moments();
  if (kind == "exp_power") return exp_power_moments(field_number(gen, "r", "generator"));
  throw Error(Errc::SchemaError, "generator.kind: unknown kind '" + kind + "'");
}

MomentProvider apply_transform(const MomentProvider& inner, const json& t, std::size_t index) {
  const std::string where = "transforms[" + std::to_string(index) + "]";
  if (!t.is_object() || !t.contains("op") || !t["op"].is_string()) throw Error(Errc::SchemaError, where + ": missing field 'op'");
  const std::string op = t["op"].get<std::string>();
  if (op == "shift") {
    const ExactRational p = field_number(t, "p", where);
    if (!p.is_integer() || p.sign() < 0 || !p.numerator().fits_ulong_p()) {
      throw Error(Errc::SchemaError, where + ".p: expected a natural number");
    }
    return shift(inner, p.numerator().get_ui());
  }
  if (op == "heyde") return heyde_transform(inner, field_number(t, "delta", where));
  if (op == "schmudgen") return schmudgen_shift(inner, field_number(t, "u", where));
  throw Error(Errc::SchemaError, where + ".op: unknown transform '" + op + "'");
}

}  // namespace

MomentProvider provider_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::SchemaError, "moment file: top level must be an object");
  if (doc.contains("name") && !doc["name"].is_null() && !doc["name"].is_string()) {
    throw Error(Errc::SchemaError, "name: expected a string");
  }
  if (doc.contains("normalized") && !doc["normalized"].is_null() && !doc["normalized"].is_boolean()) {
    throw Error(Errc::SchemaError, "normalized: expected a boolean");
  }
  const bool has_values = present(doc, "values");
  const bool has_generator = present(doc, "generator");
  if (has_values == has_generator) throw Error(Errc::SchemaError, "exactly one of 'values' and 'generator' must be present");

  MomentProvider provider = [&] {
    if (has_generator) return build_generator(doc["generator"]);
    const json& vals = doc["values"];
    if (!vals.is_array()) throw Error(Errc::SchemaError, "values: expected an array of decimal strings");
    if (vals.empty()) throw Error(Errc::SchemaError, "values: empty");
    std::vector<ExactRational> parsed;
    parsed.reserve(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const std::string where = "values[" + std::to_string(i) + "]";
      if (!vals[i].is_string()) throw Error(Errc::ParseError, where + ": expected a decimal string");
      try {
        parsed.push_back(ExactRational::parse(vals[i].get<std::string>()));
      } catch (const Error& e) {
        throw Error(Errc::ParseError, where + ": " + e.what());
      }
    }
    if (parsed.front().sign() <= 0) throw Error(Errc::SchemaError, "values[0]: m_0 must be positive");
    return explicit_moments(std::move(parsed));
  }();

  if (present(doc, "transforms")) {
    const json& ts = doc["transforms"];
    if (!ts.is_array()) throw Error(Errc::SchemaError, "transforms: expected an array");
    for (std::size_t i = 0; i < ts.size(); ++i) provider = apply_transform(provider, ts[i], i);
  }

  if (present(doc, "normalized") && doc["normalized"].get<bool>()) {
    const bool unit = provider.is_exact() ? *provider.exact_moment(0) == ExactRational(1) : provider.moment(0, 256) == 1;
    if (!unit) throw Error(Errc::SchemaError, "normalized: flag is set but m_0 != 1");
  }
  return provider;
}

MomentProvider parse_moment_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
    }
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  return provider_from_json(doc);
}

MomentProvider load_moments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open moment file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_moment_document(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + std::string(e.what()).substr(std::string(to_string(e.code())).size() + 2));
  }
}

}  // namespace momdiag
