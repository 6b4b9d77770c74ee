#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "momdiag/hankel.hpp"
#include "momdiag/spectra.hpp"

namespace momdiag {

enum class Quantity { lambda_h, lambda_s, ratio_h, ratio_s, a_minus_h, a_minus_s, b1_h, b1_s, rho_inv_h, rho_inv_s, latus };
enum class Monotone { nonincreasing, nondecreasing, none };

const char* to_string(Quantity q);
Monotone expected_monotonicity(Quantity q);

struct TraceValue {
  BigReal value;
  BigReal achieved_tol;
};

struct SequenceTrace {
  Quantity quantity = Quantity::lambda_h;
  std::map<unsigned, TraceValue> values;
  Monotone monotone_expected = Monotone::none;

  /// Values in increasing n.
  std::vector<BigReal> ordered() const;
};

struct TraceOptions {
  bool hamburger = true;   // p = 0 quantities and latus recta
  bool stieltjes = true;   // p = 1 quantities
  unsigned jobs = 0;       // 0: OpenMP default; 1: serial
};

struct TraceResult {
  std::vector<SequenceTrace> traces;
  std::vector<std::string> notes;
  /// First n at which H_{n,p} stopped being strictly positive definite.
  std::optional<unsigned> degenerate_h, degenerate_s;

  const SequenceTrace* find(Quantity q) const;
};

/// Per-(n, p) quantities for n = 0..n_max, computed in parallel and merged by n.
TraceResult trace_sequences(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                            const TraceOptions& opts = {});
/// Single-threaded reference for trace_sequences.
TraceResult trace_sequences_serial(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                                   const TraceOptions& opts = {});

enum class LimitVerdict { zero, positive, inconclusive };
const char* to_string(LimitVerdict v);

struct LimitEstimate {
  BigReal estimate;
  LimitVerdict verdict = LimitVerdict::inconclusive;
  double fit_quality = 0;
  unsigned n_used = 0;
  double zero_threshold = 0;
};

/// Geometric-plus-constant fit of the trace tail. Throws TooShort below four values.
LimitEstimate extrapolate(const SequenceTrace& trace, const PrecisionContext& ctx = {});
LimitEstimate extrapolate(const std::vector<BigReal>& values, const PrecisionContext& ctx = {});

enum class Verdict { determinate, indeterminate, inconclusive, not_applicable };
const char* to_string(Verdict v);

enum class CaseLabel { case1_SindetHindet, case2_SdetHindet, case3_SdetHdet, inconclusive };
const char* to_string(CaseLabel c);

CaseLabel case_taxonomy(const LimitEstimate& h, const LimitEstimate& s);

/// (1/Tr(H^{-1}), b1 * (m_p - a^-), lambda_1) at one chain index n.
struct BoundChain {
  unsigned n = 0;
  BigReal rho_inv, b1_times_gap, lambda;
  bool ordered = true;
};

struct DiagnosisReport {
  std::string provider;
  std::vector<SequenceTrace> traces;
  Verdict h_verdict = Verdict::inconclusive;
  Verdict s_verdict = Verdict::not_applicable;
  CaseLabel case_label = CaseLabel::inconclusive;
  std::optional<BoundChain> bound_chain_h, bound_chain_s;
  std::optional<LimitEstimate> limit_h, limit_s;
  std::vector<std::string> notes;

  const SequenceTrace* find(Quantity q) const;
};

struct DiagnoseOptions {
  unsigned jobs = 0;
  /// Chain indices; default is the last n reached.
  std::optional<unsigned> chain_n_h, chain_n_s;
};

enum class Mode { hamburger, stieltjes, both };

/// Throws DegenerateSequence when H_n loses strict positivity.
DiagnosisReport diagnose_hamburger(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                                   const DiagnoseOptions& opts = {});
/// Also throws NotStieltjes when H_{n,1} loses strict positivity.
DiagnosisReport diagnose_stieltjes(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                                   const DiagnoseOptions& opts = {});
DiagnosisReport diagnose(const MomentProvider& provider, unsigned n_max, Mode mode, const PrecisionContext& ctx,
                         const DiagnoseOptions& opts = {});

nlohmann::json report_json(const DiagnosisReport& report);

}  // namespace momdiag
