#include "momdiag/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include "momdiag/diagnosis.hpp"
#include "momdiag/parabola.hpp"

namespace momdiag {

namespace {

struct Options {
  std::string dist;
  std::string beta;
  std::string r;
  std::string file;
  std::string delta;
  std::string u;
  std::optional<unsigned> shift;
  std::optional<unsigned> n_max;
  std::string mode = "both";
  std::optional<unsigned> start_bits;
  std::optional<unsigned> max_bits;
  std::string tol;
  unsigned jobs = 0;
  std::string out;
  std::string format;
  std::string preset;
  std::string n_list = "2,4,8";
};

struct Preset {
  std::string dist, beta, r;
  unsigned n_max;
  std::optional<unsigned> chain_h, chain_s;
};

// Chain indices for (3k)! are those at which the published six-digit chains are attained.
std::optional<Preset> find_preset(const std::string& name) {
  if (name == "1a") return Preset{"weibull", "0.45", "", 40, std::nullopt, std::nullopt};
  if (name == "1b") return Preset{"exp_power", "", "3", 40, 20u, 18u};
  if (name == "1c") return Preset{"exp_power", "", "1", 40, std::nullopt, std::nullopt};
  if (name == "2") return Preset{"lognormal", "", "", 24, std::nullopt, std::nullopt};
  return std::nullopt;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ExactRational exact_flag(const std::string& name, const std::string& text) {
  if (text.empty()) throw UsageError("--" + name + " is required here");
  try {
    return ExactRational::parse(text);
  } catch (const Error&) {
    throw UsageError("--" + name + ": not a decimal number: " + text);
  }
}

void apply_preset(Options& o) {
  if (o.preset.empty()) return;
  const auto p = find_preset(o.preset);
  if (!p) throw UsageError("--paper-example must be one of 1a, 1b, 1c, 2");
  if (!o.dist.empty() || !o.file.empty()) throw UsageError("--paper-example cannot be combined with --dist or --file");
  o.dist = p->dist;
  o.beta = p->beta;
  o.r = p->r;
  if (!o.n_max) o.n_max = p->n_max;
}

MomentProvider make_provider(const Options& o) {
  if (o.dist.empty() == o.file.empty()) throw UsageError("exactly one of --dist or --file is required");
  std::optional<MomentProvider> base;
  if (!o.file.empty()) {
    base = load_moments(o.file);
  } else if (o.dist == "weibull") {
    base = weibull_moments(exact_flag("beta", o.beta));
  } else if (o.dist == "exp_power") {
    base = exp_power_moments(exact_flag("r", o.r));
  } else if (o.dist == "lognormal") {
    base = lognormal_moments();
  } else {
    throw UsageError("--dist must be weibull, exp_power or lognormal");
  }
  MomentProvider p = *base;
  if (o.shift) p = shift(p, *o.shift);
  if (!o.u.empty()) p = schmudgen_shift(p, exact_flag("u", o.u));
  if (!o.delta.empty()) p = heyde_transform(p, exact_flag("delta", o.delta));
  return p;
}

unsigned n_max_for(const Options& o) {
  const unsigned n = o.n_max.value_or(o.dist == "lognormal" ? 24 : 40);
  if (n < 2) throw UsageError("--nmax must be at least 2");
  return n;
}

PrecisionContext make_context(const Options& o) {
  PrecisionContext ctx;
  if (const char* env = std::getenv("MOMDIAG_MAX_BITS"); env && *env) {
    try {
      ctx.max_bits = static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw UsageError(std::string("MOMDIAG_MAX_BITS is not a number: ") + env);
    }
  }
  if (o.start_bits) ctx.start_bits = *o.start_bits;
  if (o.max_bits) ctx.max_bits = *o.max_bits;
  if (!o.tol.empty()) ctx.target_rel_tol = exact_flag("tol", o.tol).to_real(64).to_double();
  try {
    ctx.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return ctx;
}

Mode mode_of(const std::string& m) {
  if (m == "hamburger") return Mode::hamburger;
  if (m == "stieltjes") return Mode::stieltjes;
  if (m == "both") return Mode::both;
  throw UsageError("--mode must be hamburger, stieltjes or both");
}

/// Writes to the --out path, or to `out` when the path is "-" or empty.
void deliver(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(Errc::IoError, "write failed for " + path);
}

std::vector<unsigned> parse_n_list(const std::string& text) {
  std::vector<unsigned> ns;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      ns.push_back(static_cast<unsigned>(v));
    } catch (const std::exception&) {
      throw UsageError("--n expects a comma list of positive integers, got " + text);
    }
  }
  return ns;
}

int cmd_gen(const Options& o, std::ostream& out) {
  const MomentProvider p = make_provider(o);
  const unsigned n_max = n_max_for(o);
  const PrecisionContext ctx = make_context(o);
  const auto doc = moment_file(p, p.describe(), 2 * static_cast<std::size_t>(n_max) + 5, ctx.start_bits);
  deliver(o.out, doc.dump(2) + "\n", out);
  return kExitOk;
}

std::string chain_text(const std::optional<BoundChain>& c) {
  if (!c) return "-";
  return "n=" + std::to_string(c->n) + "  " + c->rho_inv.to_decimal(10) + " <= " + c->b1_times_gap.to_decimal(10) +
         " <= " + c->lambda.to_decimal(10) + (c->ordered ? "" : "  (ordering violated)");
}

std::string limit_text(const std::optional<LimitEstimate>& e) {
  if (!e) return "-";
  return e->estimate.to_decimal(10) + " (" + to_string(e->verdict) + ")";
}

int cmd_diag(const Options& o, std::ostream& out) {
  const MomentProvider p = make_provider(o);
  const unsigned n_max = n_max_for(o);
  const PrecisionContext ctx = make_context(o);
  const Mode mode = mode_of(o.mode);
  DiagnoseOptions opts;
  opts.jobs = o.jobs;
  if (const auto pre = find_preset(o.preset)) {
    opts.chain_n_h = pre->chain_h;
    opts.chain_n_s = pre->chain_s;
  }
  const DiagnosisReport rep = diagnose(p, n_max, mode, ctx, opts);
  const std::string json = report_json(rep).dump(2) + "\n";
  if (o.out == "-") {
    out << json;
    return kExitOk;
  }
  if (!o.out.empty()) deliver(o.out, json, out);

  out << "provider     " << rep.provider << "\n";
  out << "n_max        " << n_max << "\n";
  out << "hamburger    " << to_string(rep.h_verdict) << "\n";
  out << "  lambda_1   " << limit_text(rep.limit_h) << "\n";
  out << "  chain      " << chain_text(rep.bound_chain_h) << "\n";
  if (mode != Mode::hamburger) {
    out << "stieltjes    " << to_string(rep.s_verdict) << "\n";
    out << "  lambda_1   " << limit_text(rep.limit_s) << "\n";
    out << "  chain      " << chain_text(rep.bound_chain_s) << "\n";
    out << "case         " << to_string(rep.case_label) << "\n";
  }
  for (const auto& note : rep.notes) out << "note: " << note << "\n";
  return kExitOk;
}

int cmd_parabola(const Options& o, std::ostream& out) {
  const MomentProvider p = make_provider(o);
  const PrecisionContext ctx = make_context(o);
  PlotFormat format = PlotFormat::svg;
  if (o.format == "csv") {
    format = PlotFormat::csv;
  } else if (!o.format.empty() && o.format != "svg") {
    throw UsageError("parabola --format must be svg or csv");
  }
  const auto ns = parse_n_list(o.n_list);
  std::vector<MarkedPoint> marked;
  marked.push_back({p.moment(0, ctx.start_bits), p.moment(1, ctx.start_bits), "(m0, m1)"});
  std::ostringstream buf;
  write_regions(p, ns, marked, buf, format, ctx);
  deliver(o.out, buf.str(), out);
  return kExitOk;
}

int cmd_trace(const Options& o, std::ostream& out) {
  const MomentProvider p = make_provider(o);
  const unsigned n_max = n_max_for(o);
  const PrecisionContext ctx = make_context(o);
  const Mode mode = mode_of(o.mode);
  TraceOptions opts;
  opts.stieltjes = mode != Mode::hamburger;
  opts.jobs = o.jobs;
  const TraceResult tr = trace_sequences(p, n_max, ctx, opts);

  std::vector<const SequenceTrace*> sorted;
  for (const auto& t : tr.traces) sorted.push_back(&t);
  std::sort(sorted.begin(), sorted.end(), [](const SequenceTrace* a, const SequenceTrace* b) {
    return std::string(to_string(a->quantity)) < std::string(to_string(b->quantity));
  });
  std::ostringstream csv;
  csv << "quantity,n,value,achieved_tol\n";
  for (const auto* t : sorted) {
    for (const auto& [n, v] : t->values) {
      csv << to_string(t->quantity) << ',' << n << ',' << v.value.to_decimal(25) << ',' << v.achieved_tol.to_decimal(3)
          << '\n';
    }
  }
  deliver(o.out, csv.str(), out);
  return kExitOk;
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::InvalidParameter:
    case Errc::NotNormalized:
    case Errc::ParseError:
    case Errc::SchemaError:
    case Errc::TooShort: return kExitUsage;
    case Errc::IoError: return kExitIo;
    case Errc::DegenerateSequence:
    case Errc::NotPositiveDefinite:
    case Errc::NotStieltjes: return kExitDegenerate;
    default: return kExitFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Moment determinacy diagnostics from Hankel matrices", "momdiag"};
  app.require_subcommand(1, 1);
  Options o;

  auto source_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dist", o.dist, "Generator: weibull, exp_power or lognormal");
    cmd->add_option("--beta", o.beta, "Weibull shape (exact decimal)");
    cmd->add_option("--r", o.r, "exp_power exponent r, m_k = Gamma(r k + 1) (exact decimal)");
    cmd->add_option("--file", o.file, "Moment file (JSON)");
    cmd->add_option("--shift", o.shift, "Shift index p: m_k -> m_{k+p}");
    cmd->add_option("--u", o.u, "Binomial shift by u (x -> x - u)");
    cmd->add_option("--delta", o.delta, "Heyde transform parameter in (0,1)");
    cmd->add_option("--paper-example", o.preset, "Preset: 1a, 1b, 1c or 2");
    cmd->add_option("--start-bits", o.start_bits, "Starting precision in bits");
    cmd->add_option("--max-bits", o.max_bits, "Precision cap in bits (default 16384 or MOMDIAG_MAX_BITS)");
    cmd->add_option("--tol", o.tol, "Target relative agreement between precisions");
    cmd->add_option("--out", o.out, "Output path ('-' for stdout)");
  };
  auto diag_flags = [&](CLI::App* cmd) {
    cmd->add_option("--nmax", o.n_max, "Largest n (default 40, 24 for lognormal)");
    cmd->add_option("--mode", o.mode, "hamburger, stieltjes or both");
    cmd->add_option("--jobs", o.jobs, "Worker threads (0: all cores)");
  };

  auto* gen = app.add_subcommand("gen", "Write a moment file with m_0 .. m_{2 nmax + 4}");
  source_flags(gen);
  gen->add_option("--nmax", o.n_max, "Largest n the file must support");
  auto* diag = app.add_subcommand("diag", "Hamburger/Stieltjes diagnosis with bound chains");
  source_flags(diag);
  diag_flags(diag);
  diag->add_option("--format", o.format, "Report format (json)");
  auto* para = app.add_subcommand("parabola", "Nested parabolic regions as SVG or CSV");
  source_flags(para);
  para->add_option("--n", o.n_list, "Comma list of n");
  para->add_option("--format", o.format, "svg or csv");
  auto* trace = app.add_subcommand("trace", "CSV of every per-n sequence");
  source_flags(trace);
  diag_flags(trace);
  trace->add_option("--format", o.format, "csv");

  std::vector<const char*> argv{"momdiag"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  try {
    apply_preset(o);
    if (cmd == diag) {
      if (!o.format.empty() && o.format != "json") throw UsageError("diag writes json reports only");
      return cmd_diag(o, out);
    }
    if (cmd == trace) {
      if (!o.format.empty() && o.format != "csv") throw UsageError("trace writes csv only");
      return cmd_trace(o, out);
    }
    if (cmd == para) return cmd_parabola(o, out);
    return cmd_gen(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << cmd->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace momdiag
