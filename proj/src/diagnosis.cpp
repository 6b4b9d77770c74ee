#include "momdiag/diagnosis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

namespace momdiag {

namespace {

struct WorkItem {
  unsigned n;
  unsigned p;
};

struct Measured {
  BigReal value;
  double tol = 0;
};

struct ItemResult {
  std::optional<SpectralSummary> summary;
  std::optional<Measured> ratio;
  std::optional<Measured> a_minus;
  std::optional<Measured> latus;
  std::optional<Errc> fatal;
  std::string fatal_message;
  std::vector<std::string> notes;
  std::exception_ptr unexpected;
};

bool is_cutoff(Errc c) {
  return c == Errc::DegenerateSequence || c == Errc::NotPositiveDefinite || c == Errc::IndexOutOfRange;
}

Measured stabilized_ratio(const MomentProvider& provider, unsigned p, unsigned n, const PrecisionContext& ctx) {
  if (auto q = ratio_exact(provider, p, n)) return {q->to_real(ctx.start_bits), 0.0};
  auto s = stabilize([&](unsigned bits) { return ratio_at(provider, p, n, bits); }, ctx);
  return {std::move(s.value), s.agreement};
}

std::string where(unsigned n, unsigned p) { return "n=" + std::to_string(n) + ", p=" + std::to_string(p); }

ItemResult compute_item(const MomentProvider& provider, const WorkItem& item, const PrecisionContext& ctx) {
  ItemResult r;
  auto fail = [&](const Error& e, const char* what) {
    if (is_cutoff(e.code())) {
      if (!r.fatal) {
        r.fatal = e.code();
        r.fatal_message = e.what();
      }
    } else {
      r.notes.push_back(std::string(what) + " at " + where(item.n, item.p) + ": " + e.what());
    }
  };
  try {
    try {
      Measured ratio = stabilized_ratio(provider, item.p, item.n, ctx);
      if (ratio.value.sign() <= 0) {
        throw Error(Errc::DegenerateSequence, "D_{" + std::to_string(item.n) + "," + std::to_string(item.p) +
                                                  "} is not positive");
      }
      BigReal mp = provider.is_exact() ? provider.exact_moment(item.p)->to_real(ratio.value.bits())
                                       : provider.moment(item.p, ratio.value.bits());
      r.a_minus = Measured{mp - ratio.value, ratio.tol};
      r.ratio = std::move(ratio);
    } catch (const Error& e) {
      fail(e, "ratio");
    }
    if (!r.fatal) {
      try {
        r.summary = spectral_summary(provider, item.n, item.p, ctx);
        if (!r.summary->b1) r.notes.push_back("b1 undefined at " + where(item.n, item.p) + ": clustered eigenvalue");
      } catch (const Error& e) {
        fail(e, "spectrum");
      }
    }
    if (!r.fatal && item.p == 0 && item.n >= 1) {
      try {
        r.latus = stabilized_ratio(provider, 2, item.n - 1, ctx);
      } catch (const Error& e) {
        if (is_cutoff(e.code())) {
          r.notes.push_back(std::string("latus rectum at n=") + std::to_string(item.n) + ": " + e.what());
        } else {
          fail(e, "latus rectum");
        }
      }
    }
  } catch (...) {
    r.unexpected = std::current_exception();
  }
  return r;
}

std::vector<WorkItem> plan(const MomentProvider& provider, unsigned n_max, const TraceOptions& opts,
                           std::vector<std::string>& notes) {
  std::vector<unsigned> ps;
  if (opts.hamburger) ps.push_back(0);
  if (opts.stieltjes) ps.push_back(1);
  std::vector<WorkItem> items;
  const auto size = provider.domain_size();
  for (unsigned p : ps) {
    unsigned limit = n_max;
    if (size) {
      if (*size < p + 1) {
        notes.push_back("p=" + std::to_string(p) + ": no moments available");
        continue;
      }
      const unsigned reachable = static_cast<unsigned>((*size - 1 - p) / 2);
      if (reachable < n_max) {
        limit = reachable;
        notes.push_back("p=" + std::to_string(p) + ": trace truncated at n=" + std::to_string(limit) + " (only " +
                        std::to_string(*size) + " moments available)");
      }
    }
    for (unsigned n = 0; n <= limit; ++n) items.push_back({n, p});
  }
  // Largest matrices first so dynamic scheduling balances the tail.
  std::stable_sort(items.begin(), items.end(), [](const WorkItem& a, const WorkItem& b) { return a.n > b.n; });
  return items;
}

TraceResult assemble(const std::vector<WorkItem>& items, std::vector<ItemResult>& results, std::vector<std::string> notes,
                     const TraceOptions& opts) {
  for (const auto& r : results) {
    if (r.unexpected) std::rethrow_exception(r.unexpected);
  }
  TraceResult out;
  std::map<Quantity, SequenceTrace> traces;
  auto trace_for = [&](Quantity q) -> SequenceTrace& {
    auto [it, inserted] = traces.try_emplace(q);
    if (inserted) {
      it->second.quantity = q;
      it->second.monotone_expected = expected_monotonicity(q);
    }
    return it->second;
  };
  if (opts.hamburger) {
    for (Quantity q : {Quantity::lambda_h, Quantity::ratio_h, Quantity::a_minus_h, Quantity::b1_h, Quantity::rho_inv_h, Quantity::latus}) {
      trace_for(q);
    }
  }
  if (opts.stieltjes) {
    for (Quantity q : {Quantity::lambda_s, Quantity::ratio_s, Quantity::a_minus_s, Quantity::b1_s, Quantity::rho_inv_s}) {
      trace_for(q);
    }
  }

  // Index results by (p, n) so the merge walks n in increasing order.
  std::map<std::pair<unsigned, unsigned>, const ItemResult*> by_key;
  for (std::size_t i = 0; i < items.size(); ++i) by_key[{items[i].p, items[i].n}] = &results[i];

  std::optional<unsigned> cutoff[2];
  for (const auto& [key, r] : by_key) {
    const auto [p, n] = key;
    if (cutoff[p]) continue;
    if (r->fatal) {
      cutoff[p] = n;
      if (*r->fatal == Errc::IndexOutOfRange) {
        notes.push_back("p=" + std::to_string(p) + ": trace truncated at n=" + std::to_string(n ? n - 1 : 0) +
                        " (" + r->fatal_message + ")");
      } else {
        notes.push_back("p=" + std::to_string(p) + ": finite spectrum / not strictly positive definite at n=" +
                        std::to_string(n) + "; trace halted at n=" + std::to_string(n ? n - 1 : 0) + " (" +
                        r->fatal_message + ")");
        (p == 0 ? out.degenerate_h : out.degenerate_s) = n;
      }
      continue;
    }
    notes.insert(notes.end(), r->notes.begin(), r->notes.end());
    const bool h = p == 0;
    auto put = [&](Quantity q, const BigReal& v, const BigReal& tol) { trace_for(q).values[n] = TraceValue{v, tol}; };
    auto tol_of = [](double t, unsigned bits) { return BigReal::from_double(t, bits); };
    if (r->ratio) put(h ? Quantity::ratio_h : Quantity::ratio_s, r->ratio->value, tol_of(r->ratio->tol, r->ratio->value.bits()));
    if (r->a_minus) put(h ? Quantity::a_minus_h : Quantity::a_minus_s, r->a_minus->value, tol_of(r->a_minus->tol, r->a_minus->value.bits()));
    if (r->latus) put(Quantity::latus, r->latus->value, tol_of(r->latus->tol, r->latus->value.bits()));
    if (r->summary) {
      const auto& s = *r->summary;
      put(h ? Quantity::lambda_h : Quantity::lambda_s, s.lambda_min, s.achieved_tol);
      put(h ? Quantity::rho_inv_h : Quantity::rho_inv_s, BigReal(1, s.bits) / s.trace_inv, s.achieved_tol);
      if (s.b1) put(h ? Quantity::b1_h : Quantity::b1_s, *s.b1, s.achieved_tol);
    }
  }
  for (auto& [q, t] : traces) out.traces.push_back(std::move(t));
  out.notes = std::move(notes);
  return out;
}

TraceResult run_traces(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                       const TraceOptions& opts, bool parallel) {
  ctx.validate();
  std::vector<std::string> notes;
  const auto items = plan(provider, n_max, opts, notes);
  std::vector<ItemResult> results(items.size());
  if (parallel) {
    const int threads = opts.jobs ? static_cast<int>(opts.jobs) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(items.size()); ++i) {
      results[i] = compute_item(provider, items[i], ctx);
    }
  } else {
    for (std::size_t i = 0; i < items.size(); ++i) results[i] = compute_item(provider, items[i], ctx);
  }
  return assemble(items, results, std::move(notes), opts);
}

const SequenceTrace* find_in(const std::vector<SequenceTrace>& traces, Quantity q) {
  for (const auto& t : traces) {
    if (t.quantity == q) return &t;
  }
  return nullptr;
}

std::optional<BoundChain> chain_at(const std::vector<SequenceTrace>& traces, bool h, std::optional<unsigned> wanted,
                                   std::vector<std::string>& notes) {
  const auto* lambda = find_in(traces, h ? Quantity::lambda_h : Quantity::lambda_s);
  const auto* rho = find_in(traces, h ? Quantity::rho_inv_h : Quantity::rho_inv_s);
  const auto* ratio = find_in(traces, h ? Quantity::ratio_h : Quantity::ratio_s);
  const auto* b1 = find_in(traces, h ? Quantity::b1_h : Quantity::b1_s);
  if (!lambda || !rho || !ratio || !b1 || b1->values.empty()) return std::nullopt;
  const char* name = h ? "hamburger" : "stieltjes";

  // Largest n at which every chain ingredient exists.
  std::optional<unsigned> last;
  for (const auto& [n, v] : b1->values) {
    if (lambda->values.count(n) && rho->values.count(n) && ratio->values.count(n)) last = n;
  }
  if (!last) return std::nullopt;
  unsigned n = *last;
  if (wanted) {
    if (b1->values.count(*wanted) && lambda->values.count(*wanted) && rho->values.count(*wanted) &&
        ratio->values.count(*wanted)) {
      n = *wanted;
    } else {
      notes.push_back(std::string(name) + " chain: n=" + std::to_string(*wanted) + " unavailable, using n=" +
                      std::to_string(n));
    }
  }
  BoundChain c;
  c.n = n;
  c.rho_inv = rho->values.at(n).value;
  c.b1_times_gap = b1->values.at(n).value * ratio->values.at(n).value;
  c.lambda = lambda->values.at(n).value;

  double tol = 1e-12;
  for (const auto* t : {lambda, rho, ratio, b1}) tol = std::max(tol, t->values.at(n).achieved_tol.to_double());
  const BigReal slack = BigReal::from_double(1 + 10 * tol, c.lambda.bits());
  c.ordered = c.rho_inv <= c.b1_times_gap * slack && c.b1_times_gap <= c.lambda * slack;
  if (!c.ordered) notes.push_back(std::string(name) + " chain ordering violated at n=" + std::to_string(n));
  return c;
}

Verdict from_limit(const LimitEstimate& e) {
  switch (e.verdict) {
    case LimitVerdict::zero: return Verdict::determinate;
    case LimitVerdict::positive: return Verdict::indeterminate;
    default: return Verdict::inconclusive;
  }
}

std::optional<LimitEstimate> try_extrapolate(const SequenceTrace* t, const char* name, std::vector<std::string>& notes) {
  if (!t) return std::nullopt;
  try {
    return extrapolate(*t);
  } catch (const Error& e) {
    if (e.code() != Errc::TooShort) throw;
    notes.push_back(std::string(name) + ": " + e.what());
    return std::nullopt;
  }
}

}  // namespace

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::lambda_h: return "lambda_h";
    case Quantity::lambda_s: return "lambda_s";
    case Quantity::ratio_h: return "ratio_h";
    case Quantity::ratio_s: return "ratio_s";
    case Quantity::a_minus_h: return "a_minus_h";
    case Quantity::a_minus_s: return "a_minus_s";
    case Quantity::b1_h: return "b1_h";
    case Quantity::b1_s: return "b1_s";
    case Quantity::rho_inv_h: return "rho_inv_h";
    case Quantity::rho_inv_s: return "rho_inv_s";
    case Quantity::latus: return "latus";
  }
  return "?";
}

Monotone expected_monotonicity(Quantity q) {
  switch (q) {
    case Quantity::a_minus_h:
    case Quantity::a_minus_s: return Monotone::nondecreasing;
    case Quantity::b1_h:
    case Quantity::b1_s: return Monotone::none;
    default: return Monotone::nonincreasing;
  }
}

std::vector<BigReal> SequenceTrace::ordered() const {
  std::vector<BigReal> out;
  out.reserve(values.size());
  for (const auto& [n, v] : values) out.push_back(v.value);
  return out;
}

const SequenceTrace* TraceResult::find(Quantity q) const { return find_in(traces, q); }
const SequenceTrace* DiagnosisReport::find(Quantity q) const { return find_in(traces, q); }

TraceResult trace_sequences(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                            const TraceOptions& opts) {
  return run_traces(provider, n_max, ctx, opts, opts.jobs != 1);
}

TraceResult trace_sequences_serial(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                                   const TraceOptions& opts) {
  return run_traces(provider, n_max, ctx, opts, false);
}

const char* to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::zero: return "zero";
    case LimitVerdict::positive: return "positive";
    case LimitVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

LimitEstimate extrapolate(const SequenceTrace& trace, const PrecisionContext& ctx) {
  return extrapolate(trace.ordered(), ctx);
}

LimitEstimate extrapolate(const std::vector<BigReal>& values, const PrecisionContext& /*ctx*/) {
  const std::size_t total = values.size();
  if (total < 4) throw Error(Errc::TooShort, "extrapolation needs at least 4 values, got " + std::to_string(total));
  const std::size_t t = std::min(total, std::max<std::size_t>(4, (total + 1) / 2));
  std::vector<double> v;
  for (std::size_t i = total - t; i < total; ++i) v.push_back(values[i].to_double());
  const unsigned bits = values.back().bits();

  LimitEstimate out;
  out.n_used = static_cast<unsigned>(t);
  out.zero_threshold = std::max(1e-10, 1e-2 * std::abs(v.front()));
  const double thr = out.zero_threshold;
  const double last = v.back();

  double c = last;
  double resid = 0;
  bool usable = true;

  double vmax = 0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  std::vector<double> d(t - 1);
  bool all_negligible = true;
  int sign = 0;
  bool mixed = false;
  for (std::size_t i = 0; i + 1 < t; ++i) {
    d[i] = v[i + 1] - v[i];
    if (std::abs(d[i]) > 1e-12 * vmax) {
      all_negligible = false;
      const int s = d[i] > 0 ? 1 : -1;
      if (sign && s != sign) mixed = true;
      sign = s;
    }
  }

  if (all_negligible) {
    out.fit_quality = 1.0;
  } else if (mixed || std::any_of(d.begin(), d.end(), [](double x) { return x == 0; })) {
    usable = false;
  } else {
    // log|d_i| = A + B i by least squares; the remaining increments sum geometrically.
    const double m = static_cast<double>(d.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double x = static_cast<double>(i), y = std::log(std::abs(d[i]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double B = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double A = (sy - B * sx) / m;
    const double r = std::exp(B);
    if (!(r < 1)) {
      usable = false;
    } else {
      const double next = sign * std::exp(A + B * m);
      c = last + next / (1 - r);
      double vmin = v.front(), vmx = v.front();
      for (double x : v) {
        vmin = std::min(vmin, x);
        vmx = std::max(vmx, x);
      }
      const double variation = vmx - vmin;
      for (std::size_t i = 0; i < t; ++i) {
        const double model = c + (last - c) * std::pow(r, static_cast<double>(i) - static_cast<double>(t - 1));
        resid = std::max(resid, std::abs(v[i] - model));
      }
      resid = variation > 0 ? resid / variation : 0;
      out.fit_quality = std::max(0.0, 1.0 - resid);
      if (resid > 0.1) usable = false;
    }
  }

  out.estimate = BigReal::from_double(std::max(0.0, c), bits);
  if (!usable) {
    out.verdict = LimitVerdict::inconclusive;
    return out;
  }
  const double first_all = values.front().to_double();
  const double prev = values[total - 2].to_double();
  const double last_change = last != 0 ? std::abs(last - prev) / std::abs(last) : INFINITY;
  if (c < thr && first_all != 0 && std::abs(last / first_all) < 1e-2) {
    out.verdict = LimitVerdict::zero;
  } else if (c > 10 * thr && last_change < 1e-2) {
    out.verdict = LimitVerdict::positive;
  } else {
    out.verdict = LimitVerdict::inconclusive;
  }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::determinate: return "determinate";
    case Verdict::indeterminate: return "indeterminate";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "?";
}

const char* to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::case1_SindetHindet: return "case1_SindetHindet";
    case CaseLabel::case2_SdetHindet: return "case2_SdetHindet";
    case CaseLabel::case3_SdetHdet: return "case3_SdetHdet";
    case CaseLabel::inconclusive: return "inconclusive";
  }
  return "?";
}

CaseLabel case_taxonomy(const LimitEstimate& h, const LimitEstimate& s) {
  if (h.verdict == LimitVerdict::zero) return CaseLabel::case3_SdetHdet;
  if (h.verdict == LimitVerdict::positive) {
    if (s.verdict == LimitVerdict::positive) return CaseLabel::case1_SindetHindet;
    if (s.verdict == LimitVerdict::zero) return CaseLabel::case2_SdetHindet;
  }
  return CaseLabel::inconclusive;
}

DiagnosisReport diagnose(const MomentProvider& provider, unsigned n_max, Mode mode, const PrecisionContext& ctx,
                         const DiagnoseOptions& opts) {
  const bool stieltjes = mode != Mode::hamburger;
  TraceOptions topts;
  topts.hamburger = true;
  topts.stieltjes = stieltjes;
  topts.jobs = opts.jobs;
  TraceResult tr = trace_sequences(provider, n_max, ctx, topts);

  if (tr.degenerate_h) {
    throw Error(Errc::DegenerateSequence, "finite spectrum / not strictly positive definite: H_n is singular at n=" +
                                              std::to_string(*tr.degenerate_h));
  }
  if (stieltjes && tr.degenerate_s) {
    throw Error(Errc::NotStieltjes, "H_{n,1} is not strictly positive definite at n=" + std::to_string(*tr.degenerate_s));
  }

  DiagnosisReport rep;
  rep.provider = provider.describe();
  rep.notes = std::move(tr.notes);
  rep.traces = std::move(tr.traces);

  rep.limit_h = try_extrapolate(rep.find(Quantity::lambda_h), "lambda_h", rep.notes);
  rep.h_verdict = rep.limit_h ? from_limit(*rep.limit_h) : Verdict::inconclusive;
  rep.bound_chain_h = chain_at(rep.traces, true, opts.chain_n_h, rep.notes);

  if (stieltjes) {
    rep.limit_s = try_extrapolate(rep.find(Quantity::lambda_s), "lambda_s", rep.notes);
    const bool h_zero = rep.limit_h && rep.limit_h->verdict == LimitVerdict::zero;
    const bool s_zero = rep.limit_s && rep.limit_s->verdict == LimitVerdict::zero;
    const bool h_pos = rep.limit_h && rep.limit_h->verdict == LimitVerdict::positive;
    const bool s_pos = rep.limit_s && rep.limit_s->verdict == LimitVerdict::positive;
    if (h_zero || s_zero) {
      rep.s_verdict = Verdict::determinate;
    } else if (h_pos && s_pos) {
      rep.s_verdict = Verdict::indeterminate;
    } else {
      rep.s_verdict = Verdict::inconclusive;
    }
    rep.bound_chain_s = chain_at(rep.traces, false, opts.chain_n_s, rep.notes);
    rep.case_label = rep.limit_h && rep.limit_s ? case_taxonomy(*rep.limit_h, *rep.limit_s) : CaseLabel::inconclusive;

    // The ratio criterion and the eigenvalue criterion must not contradict each other.
    if (auto ratio_s = try_extrapolate(rep.find(Quantity::ratio_s), "ratio_s", rep.notes); ratio_s && rep.limit_s) {
      const bool definite = ratio_s->verdict != LimitVerdict::inconclusive && rep.limit_s->verdict != LimitVerdict::inconclusive;
      if (definite && ratio_s->verdict != rep.limit_s->verdict) {
        rep.notes.push_back(std::string("ratio_s limit is ") + to_string(ratio_s->verdict) + " but lambda_s limit is " +
                            to_string(rep.limit_s->verdict));
      }
    }
  }
  return rep;
}

DiagnosisReport diagnose_hamburger(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                                   const DiagnoseOptions& opts) {
  return diagnose(provider, n_max, Mode::hamburger, ctx, opts);
}

DiagnosisReport diagnose_stieltjes(const MomentProvider& provider, unsigned n_max, const PrecisionContext& ctx,
                                   const DiagnoseOptions& opts) {
  return diagnose(provider, n_max, Mode::stieltjes, ctx, opts);
}

nlohmann::json report_json(const DiagnosisReport& report) {
  constexpr int digits = 25;
  using nlohmann::json;
  json j;
  j["provider"] = report.provider;
  j["h_verdict"] = to_string(report.h_verdict);
  j["s_verdict"] = to_string(report.s_verdict);
  j["case"] = report.s_verdict == Verdict::not_applicable ? json(nullptr) : json(to_string(report.case_label));

  json chains = json::object(), chain_n = json::object();
  auto put_chain = [&](const char* key, const std::optional<BoundChain>& c) {
    if (!c) return;
    chains[key] = {c->rho_inv.to_decimal(digits), c->b1_times_gap.to_decimal(digits), c->lambda.to_decimal(digits)};
    chain_n[key] = c->n;
  };
  put_chain("hamburger", report.bound_chain_h);
  put_chain("stieltjes", report.bound_chain_s);
  j["chains"] = chains;
  j["chain_n"] = chain_n;

  json limits = json::object();
  auto put_limit = [&](const char* key, const std::optional<LimitEstimate>& e) {
    if (!e) return;
    limits[key] = {{"estimate", e->estimate.to_decimal(digits)},
                   {"verdict", to_string(e->verdict)},
                   {"fit_quality", e->fit_quality},
                   {"n_used", e->n_used},
                   {"zero_threshold", e->zero_threshold}};
  };
  put_limit("lambda_h", report.limit_h);
  put_limit("lambda_s", report.limit_s);
  j["limits"] = limits;

  json traces = json::object();
  for (const auto& t : report.traces) {
    json arr = json::array();
    for (const auto& [n, v] : t.values) {
      arr.push_back({{"n", n}, {"value", v.value.to_decimal(digits)}, {"achieved_tol", v.achieved_tol.to_decimal(digits)}});
    }
    traces[to_string(t.quantity)] = arr;
  }
  j["traces"] = traces;
  j["notes"] = report.notes;
  return j;
}

}  // namespace momdiag
