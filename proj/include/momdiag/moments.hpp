#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "momdiag/numerics.hpp"

namespace momdiag {

enum class Exactness { rational, transcendental };

/// Immutable, shareable source of moments m_0, m_1, ... of a positive measure.
///
/// Providers are cheap handles onto an immutable description; they are safe
/// to share between worker threads and every evaluation is a pure function
/// of (provider, k, bits).
class MomentProvider {
 public:
  struct Node;

  explicit MomentProvider(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  Exactness exactness() const;
  bool is_exact() const { return exactness() == Exactness::rational; }

  /// Number of moments served, or nullopt for an infinite generator.
  std::optional<std::size_t> domain_size() const;

  /// m_k with relative error <= 2^(8 - bits). Throws IndexOutOfRange.
  BigReal moment(std::size_t k, unsigned bits) const;
  /// Exact m_k for rational providers, nullopt otherwise.
  std::optional<ExactRational> exact_moment(std::size_t k) const;

  /// Short human-readable label, e.g. "weibull(beta=9/20)".
  std::string describe() const;
  /// Moment-file JSON fragment ({"generator": ..., "transforms": [...]} or {"values": ...}).
  nlohmann::json to_json() const;

  const Node& node() const { return *node_; }

 private:
  std::shared_ptr<const Node> node_;
};

MomentProvider weibull_moments(const ExactRational& beta);
MomentProvider lognormal_moments();
MomentProvider exp_power_moments(const ExactRational& r);
MomentProvider explicit_moments(std::vector<ExactRational> values);
MomentProvider shift(const MomentProvider& inner, std::size_t p);
MomentProvider heyde_transform(const MomentProvider& inner, const ExactRational& delta);
MomentProvider schmudgen_shift(const MomentProvider& inner, const ExactRational& u);

inline BigReal moment(const MomentProvider& provider, std::size_t k, unsigned bits) { return provider.moment(k, bits); }

/// m_0 .. m_{count-1} at the given precision.
std::vector<BigReal> moment_table(const MomentProvider& provider, std::size_t count, unsigned bits);

/// Reads a moment file (JSON). Throws ParseError, SchemaError or IoError.
MomentProvider load_moments(const std::filesystem::path& path);
/// Same as load_moments for an in-memory document.
MomentProvider parse_moment_document(const std::string& text);
/// Builds a provider from an already parsed moment-file object.
MomentProvider provider_from_json(const nlohmann::json& doc);

/// Moment-file document with explicit values m_0 .. m_{count-1}. Rational
/// providers emit exact integers or fractions; others emit decimals with
/// `digits` significant digits evaluated at `bits`.
nlohmann::json moment_file(const MomentProvider& provider, const std::string& name, std::size_t count, unsigned bits,
                           int digits = 25);

}  // namespace momdiag
