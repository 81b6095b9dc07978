#pragma once

// Experiment configuration and batch runs writing CSV, SVG and a JSON manifest.
//
// Config files hold one `key = value` per line; '#' starts a comment and list
// values are comma separated. Recognised keys:
//
//   mode             count | detect | coverage | goodset | qnd | identities | scaling
//   curve            catalog name ("parabola", "veronese:3", "poly:0,0,1", "expmix")
//   curve.domain     lo,hi
//   B                lo,hi
//   theta.lambda     real
//   theta.gamma      reals, one per coordinate function
//   c                real > 0
//   M                second-derivative bound; estimated on B when absent
//   M.safety         inflation of the estimated M (default 1.05)
//   Q_list           ascending reals
//   psi_list         reals in (0,1)
//   seed, jobs       integers
//   precision        double | extended
//   output_dir       path
//   svg              true | false
//   detect.points, goodset.points, qnd.grid, qnd.window_samples, identities.draws
//   qnd.alpha, qnd.eps

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ratpts/common.hpp"
#include "ratpts/counting.hpp"
#include "ratpts/curve.hpp"
#include "ratpts/detector.hpp"
#include "ratpts/exterior.hpp"
#include "ratpts/goodness.hpp"
#include "ratpts/lattice.hpp"
#include "ratpts/qnd.hpp"
#include "ratpts/svg.hpp"

namespace ratpts {

enum class Mode { Count, Detect, Coverage, GoodSet, Qnd, Identities, Scaling };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Count: return "count";
    case Mode::Detect: return "detect";
    case Mode::Coverage: return "coverage";
    case Mode::GoodSet: return "goodset";
    case Mode::Qnd: return "qnd";
    case Mode::Identities: return "identities";
    case Mode::Scaling: return "scaling";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  for (Mode m : {Mode::Count, Mode::Detect, Mode::Coverage, Mode::GoodSet, Mode::Qnd, Mode::Identities, Mode::Scaling})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct ExperimentConfig {
  Mode mode = Mode::Count;
  std::string curve = "parabola";
  Interval domain = kDefaultDomain;
  Interval B{0.0, 1.0};
  double lambda = 0.0;
  std::vector<double> gamma;
  double c = 1.0;
  std::optional<double> M;
  double M_safety = 1.05;
  std::vector<double> Q_list{1024};
  std::vector<double> psi_list{0.3};
  std::uint64_t seed = 1;
  int jobs = 1;
  bool extended = false;
  std::string output_dir = "out";
  bool svg = false;
  int detect_points = 500;
  int goodset_points = 1000;
  int qnd_grid = 2000;
  int qnd_window_samples = 32;
  std::optional<double> qnd_alpha;
  std::vector<double> qnd_eps;
  int identity_draws = 1000;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  const double d = parse_real(key, v);
  if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError("config key '" + key + "': expected an integer");
  return static_cast<long long>(d);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

inline Interval parse_interval(const std::string& key, const std::string& v) {
  const auto xs = parse_list(key, v);
  if (xs.size() != 2 || xs[0] > xs[1]) throw ConfigError("config key '" + key + "': expected lo,hi with lo <= hi");
  return {xs[0], xs[1]};
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false");
}

inline int positive_int(const std::string& key, const std::string& v) {
  const long long k = parse_integer(key, v);
  if (k < 1 || k > 100000000) throw ConfigError("config key '" + key + "': expected a positive integer");
  return static_cast<int>(k);
}

}  // namespace detail

/// Applies one setting; unknown keys and malformed values raise ConfigError naming the key.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  if (key == "mode") {
    const auto m = parse_mode(v);
    if (!m) throw ConfigError("config key 'mode': unknown mode '" + v + "'");
    cfg.mode = *m;
  } else if (key == "curve") {
    cfg.curve = v;
  } else if (key == "curve.domain") {
    cfg.domain = parse_interval(key, v);
  } else if (key == "B") {
    cfg.B = parse_interval(key, v);
  } else if (key == "theta.lambda") {
    cfg.lambda = parse_real(key, v);
  } else if (key == "theta.gamma") {
    cfg.gamma = parse_list(key, v);
  } else if (key == "c") {
    cfg.c = parse_real(key, v);
  } else if (key == "M") {
    cfg.M = parse_real(key, v);
  } else if (key == "M.safety") {
    cfg.M_safety = parse_real(key, v);
  } else if (key == "Q_list") {
    cfg.Q_list = parse_list(key, v);
  } else if (key == "psi_list") {
    cfg.psi_list = parse_list(key, v);
  } else if (key == "seed") {
    const long long s = parse_integer(key, v);
    if (s < 0) throw ConfigError("config key 'seed': must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "jobs") {
    cfg.jobs = positive_int(key, v);
  } else if (key == "precision") {
    if (v != "double" && v != "extended") throw ConfigError("config key 'precision': expected double or extended");
    cfg.extended = v == "extended";
  } else if (key == "output_dir") {
    cfg.output_dir = v;
  } else if (key == "svg") {
    cfg.svg = parse_bool(key, v);
  } else if (key == "detect.points") {
    cfg.detect_points = positive_int(key, v);
  } else if (key == "goodset.points") {
    cfg.goodset_points = positive_int(key, v);
  } else if (key == "qnd.grid") {
    cfg.qnd_grid = positive_int(key, v);
  } else if (key == "qnd.window_samples") {
    cfg.qnd_window_samples = positive_int(key, v);
  } else if (key == "qnd.alpha") {
    cfg.qnd_alpha = parse_real(key, v);
  } else if (key == "qnd.eps") {
    cfg.qnd_eps = parse_list(key, v);
  } else if (key == "identities.draws") {
    cfg.identity_draws = positive_int(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// "key=value" form used for command-line overrides.
inline void apply_assignment(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  apply_setting(cfg, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

inline void parse_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.find('=') == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_assignment(cfg, line);
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  parse_config_text(cfg, ss.str());
  return cfg;
}

/// Cross-field checks.
inline void validate_config(const ExperimentConfig& cfg) {
  if (!(cfg.c > 0.0)) throw ConfigError("config key 'c': must be positive");
  if (cfg.M && *cfg.M < 0.0) throw ConfigError("config key 'M': must be nonnegative");
  if (!(cfg.M_safety >= 1.0)) throw ConfigError("config key 'M.safety': must be at least 1");
  if (!std::is_sorted(cfg.Q_list.begin(), cfg.Q_list.end()))
    throw ConfigError("config key 'Q_list': values must be ascending");
  for (double Q : cfg.Q_list)
    if (!(Q > 1.0)) throw ConfigError("config key 'Q_list': values must exceed 1");
  for (double psi : cfg.psi_list)
    if (!(psi > 0.0 && psi < 1.0)) throw ConfigError("config key 'psi_list': values must lie in (0,1)");
  for (double e : cfg.qnd_eps)
    if (!(e >= 0.0)) throw ConfigError("config key 'qnd.eps': values must be nonnegative");
  if (!std::is_sorted(cfg.qnd_eps.rbegin(), cfg.qnd_eps.rend()))
    throw ConfigError("config key 'qnd.eps': values must be descending");
  const bool integral = std::all_of(cfg.Q_list.begin(), cfg.Q_list.end(), [](double Q) { return Q == std::floor(Q); });
  if ((cfg.mode == Mode::Count || cfg.mode == Mode::Scaling || cfg.mode == Mode::Coverage) && !integral)
    throw ConfigError("config key 'Q_list': counting modes need integer Q");
}

struct ExperimentResult {
  std::vector<std::string> files;
  std::vector<std::string> notes;
  bool checks_passed = true;
};

// --------------------------------------------------------------------------
// Identity sweeps
// --------------------------------------------------------------------------

struct IdentityStats {
  std::string name;
  int draws = 0;
  double max_error = 0.0;  // relative unless noted in the name
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
};

inline double relative_error(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Random full-rank integer matrix with entries in [lo, hi].
template <class Rng>
IntMatrix random_full_rank(Rng& rng, int rows, int cols, int lo, int hi) {
  std::uniform_int_distribution<int> entry(lo, hi);
  for (;;) {
    IntMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = entry(rng);
    if (integer_rank(m) == cols) return m;
  }
}

inline std::vector<int> closed_form_indices(ClosedFormCase kind, int n) {
  std::vector<int> I(static_cast<std::size_t>(n - 1));
  std::iota(I.begin(), I.end(), 1);
  if (kind == ClosedFormCase::Affine) I.push_back(n);
  if (kind == ClosedFormCase::Derivative) I.push_back(n + 1);
  return I;
}

inline const char* to_string(ClosedFormCase k) {
  switch (k) {
    case ClosedFormCase::Affine: return "affine";
    case ClosedFormCase::Derivative: return "derivative";
    case ClosedFormCase::SkewGradient: return "skew_gradient";
  }
  return "?";
}

/// |phi_minor| against phi_closed_form over random x in B and random Gamma.
template <class Rng>
IdentityStats closed_form_sweep(const Curve& curve, const Interval& B, ClosedFormCase kind, int draws, Rng& rng) {
  IdentityStats st{std::string("closed_form_") + to_string(kind) + "_" + curve.label(), draws, 0.0, 1e-9};
  std::uniform_real_distribution<double> xs(B.lo, B.hi);
  const int n = curve.n();
  const std::vector<int> I = closed_form_indices(kind, n);
  for (int k = 0; k < draws; ++k) {
    MinorSpec spec{I, random_full_rank(rng, n + 1, static_cast<int>(I.size()), -3, 3)};
    const double x = xs(rng);
    st.max_error = std::max(st.max_error, relative_error(std::abs(phi_minor(curve, x, spec)), phi_closed_form(curve, x, spec)));
  }
  return st;
}

// --------------------------------------------------------------------------
// Runs
// --------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string param(double v) { return fmt(v, "%.10g"); }

struct RunContext {
  const ExperimentConfig& cfg;
  Curve curve;
  double M = 0.0;
  std::string M_source;
  DerivedConstants k;
  std::filesystem::path dir;
  ExperimentResult result;
  nlohmann::ordered_json manifest;

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    result.files.push_back(name);
    return os;
  }

  ApproxParams params(double Q, double psi) const {
    ApproxParams p = ApproxParams::for_curve(curve, cfg.c, Q, psi, cfg.B);
    p.lambda = {cfg.lambda};
    if (!cfg.gamma.empty()) p.gamma = cfg.gamma;
    return p;
  }

  Shift shift() const { return {cfg.lambda, cfg.gamma}; }

  CountOptions count_options() const {
    CountOptions o;
    o.jobs = cfg.jobs;
    o.extended = cfg.extended && curve.has_extended();
    return o;
  }

  void fail(const std::string& what) {
    result.checks_passed = false;
    result.notes.push_back("check failed: " + what);
  }
};

inline void run_count(RunContext& ctx) {
  auto summary = ctx.open("count_summary.csv");
  summary << "Q,psi,count,boundary\n";
  for (double Q : ctx.cfg.Q_list)
    for (double psi : ctx.cfg.psi_list) {
      const CountResult r = enumerate_R(ctx.curve, static_cast<long long>(Q), psi, ctx.cfg.B, ctx.shift(), ctx.count_options());
      auto os = ctx.open("count_Q" + param(Q) + "_psi" + param(psi) + ".csv");
      write_witness_csv(os, r.witnesses, ctx.curve, psi, ctx.shift());
      summary << param(Q) << ',' << param(psi) << ',' << r.count << ',' << r.boundary << '\n';
    }
}

inline void run_scaling(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const int n = ctx.curve.n();
  std::map<std::pair<double, double>, long long> counts;
  auto table = ctx.open("scaling.csv");
  table << "Q,psi,count,boundary,lower_bound,in_regime,bound_ok\n";
  for (double Q : cfg.Q_list)
    for (double psi : cfg.psi_list) {
      const CountSummary s = count_R(ctx.curve, static_cast<long long>(Q), psi, cfg.B, ctx.shift(), ctx.count_options());
      counts[{Q, psi}] = s.count;
      const LowerBoundCheck lb = lower_bound_check(s.count, cfg.B, ctx.k.C0, psi, Q, n, ctx.k.K0);
      table << param(Q) << ',' << param(psi) << ',' << s.count << ',' << s.boundary << ',' << fmt(lb.bound) << ','
            << (lb.in_regime ? 1 : 0) << ',' << (lb.passed ? 1 : 0) << '\n';
      if (lb.in_regime && !lb.passed) ctx.fail("lower bound at Q=" + param(Q) + " psi=" + param(psi));
    }
  auto fits = ctx.open("scaling_fits.csv");
  fits << "axis,fixed,slope,intercept,r_squared,points\n";
  std::vector<PlotSeries> by_Q, by_psi;
  auto fit_series = [&](const std::string& axis, double fixed, std::vector<std::pair<double, double>> pts,
                        std::vector<PlotSeries>& plot) {
    std::erase_if(pts, [](const auto& s) { return s.second <= 0.0; });
    PlotSeries series{axis == "Q" ? "psi=" + param(fixed) : "Q=" + param(fixed), pts};
    if (pts.size() >= 3) {
      const ScalingFit f = scaling_fit(pts);
      fits << axis << ',' << param(fixed) << ',' << fmt(f.slope) << ',' << fmt(f.intercept) << ',' << fmt(f.r_squared)
           << ',' << pts.size() << '\n';
      series.has_fit = true;
      series.slope = f.slope;
      series.intercept = f.intercept;
    }
    plot.push_back(std::move(series));
  };
  for (double psi : cfg.psi_list) {
    std::vector<std::pair<double, double>> pts;
    for (double Q : cfg.Q_list) pts.emplace_back(Q, static_cast<double>(counts[{Q, psi}]));
    fit_series("Q", psi, pts, by_Q);
  }
  for (double Q : cfg.Q_list) {
    std::vector<std::pair<double, double>> pts;
    for (double psi : cfg.psi_list) pts.emplace_back(psi, static_cast<double>(counts[{Q, psi}]));
    fit_series("psi", Q, pts, by_psi);
  }
  if (cfg.svg) {
    auto a = ctx.open("scaling_Q.svg");
    write_loglog_svg(a, "#R against Q (" + ctx.curve.label() + ")", "Q", "#R", by_Q);
    auto b = ctx.open("scaling_psi.svg");
    write_loglog_svg(b, "#R against psi (" + ctx.curve.label() + ")", "psi", "#R", by_psi);
  }
}

inline void run_coverage(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  auto os = ctx.open("coverage.csv");
  os << "Q,psi,count,rho,coverage,coverage_fraction\n";
  for (double Q : cfg.Q_list)
    for (double psi : cfg.psi_list) {
      const CountResult r = enumerate_R(ctx.curve, static_cast<long long>(Q), psi, cfg.B, ctx.shift(), ctx.count_options());
      const double rho = ctx.k.rho(Q, psi);
      const double cov = delta_coverage(r.witnesses, rho, cfg.B, cfg.lambda);
      const double frac = cfg.B.length() > 0 ? cov / cfg.B.length() : 0.0;
      os << param(Q) << ',' << param(psi) << ',' << r.count << ',' << fmt(rho) << ',' << fmt(cov) << ',' << fmt(frac)
         << '\n';
      if (frac < 0.5) ctx.fail("coverage below |B|/2 at Q=" + param(Q) + " psi=" + param(psi));
    }
}

inline void run_detect(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const int m = ctx.curve.m();
  auto os = ctx.open("detect.csv");
  os << "Q,psi,x,delta,good,boundary,q,a";
  for (int j = 1; j <= m; ++j) os << ",b" << j;
  os << ",all_ok,basis_diagnostic\n";
  for (double Q : cfg.Q_list)
    for (double psi : cfg.psi_list) {
      const ApproxParams p = ctx.params(Q, psi);
      const double rho = witness_radius(p);
      int good = 0, failures = 0, diagnostics = 0;
      for (int i = 0; i < cfg.detect_points; ++i) {
        const double x = cfg.B.lo + (i + 0.5) * cfg.B.length() / cfg.detect_points;
        if (!(x - rho >= cfg.B.lo && x + rho <= cfg.B.hi)) continue;
        const GoodSetStatus st = good_set_status(ctx.curve, x, p);
        os << param(Q) << ',' << param(psi) << ',' << fmt(x) << ',' << fmt(st.delta) << ',' << (st.good ? 1 : 0) << ','
           << (st.boundary ? 1 : 0);
        if (!st.good || st.boundary) {
          os << ",,";
          for (int j = 0; j < m; ++j) os << ',';
          os << ",,\n";
          continue;
        }
        ++good;
        const Detection d = detect_witness(ctx.curve, x, p);
        const WitnessReport rep = verify_witness(d.witness, ctx.curve, x, p, ctx.k);
        if (!rep.all_ok) ++failures;
        if (d.basis_diagnostic) ++diagnostics;
        os << ',' << d.witness.q << ',' << d.witness.a[0];
        for (long long b : d.witness.b) os << ',' << b;
        os << ',' << (rep.all_ok ? 1 : 0) << ',' << (d.basis_diagnostic ? 1 : 0) << '\n';
      }
      ctx.result.notes.push_back("Q=" + param(Q) + " psi=" + param(psi) + ": " + std::to_string(good) +
                                 " good points, " + std::to_string(failures) + " failed witnesses, " +
                                 std::to_string(diagnostics) + " basis diagnostics");
      if (failures > 0) ctx.fail("witness verification at Q=" + param(Q) + " psi=" + param(psi));
    }
}

inline void run_goodset(RunContext& ctx) {
  auto os = ctx.open("goodset.csv");
  os << "Q,psi,points,good,boundary,fraction\n";
  for (double Q : ctx.cfg.Q_list)
    for (double psi : ctx.cfg.psi_list) {
      const GoodSetSummary s = good_set_fraction(ctx.curve, ctx.params(Q, psi), ctx.cfg.goodset_points);
      os << param(Q) << ',' << param(psi) << ',' << s.points << ',' << s.good << ',' << s.boundary << ','
         << fmt(s.fraction) << '\n';
    }
}

inline std::vector<double> default_qnd_eps() {
  std::vector<double> e;
  for (int k = 0; k <= 8; ++k) e.push_back(std::pow(10.0, -1.0 - k / 4.0));
  return e;
}

inline void run_qnd(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  double alpha = 0.0;
  if (cfg.qnd_alpha) {
    alpha = *cfg.qnd_alpha;
  } else {
    const auto l = nondegeneracy_order(ctx.curve, cfg.B.center(), ctx.curve.l_max());
    if (!l) throw PreconditionError("qnd: curve is degenerate at the centre of B; set qnd.alpha");
    alpha = 1.0 / (2 * *l - 1);
  }
  const std::vector<double> eps = cfg.qnd_eps.empty() ? default_qnd_eps() : cfg.qnd_eps;
  QndOptions opt;
  opt.grid = cfg.qnd_grid;
  opt.window_samples = cfg.qnd_window_samples;
  opt.seed = cfg.seed;
  opt.jobs = cfg.jobs;
  auto os = ctx.open("qnd.csv");
  os << "Q,psi,eps,grid_fraction,refined_fraction,ratio,km_bound,implied_C\n";
  auto fits = ctx.open("qnd_fit.csv");
  fits << "Q,psi,alpha,slope,r_squared,points,nonincreasing\n";
  std::vector<PlotSeries> plot;
  for (double Q : cfg.Q_list)
    for (double psi : cfg.psi_list) {
      const QndTable t = qnd_bound_check(ctx.curve, cfg.B, ctx.params(Q, psi), alpha, eps, opt);
      PlotSeries series{"Q=" + param(Q) + " psi=" + param(psi), {}};
      for (const auto& r : t.rows) {
        os << param(Q) << ',' << param(psi) << ',' << param(r.eps) << ',' << fmt(r.grid_fraction) << ','
           << (std::isnan(r.refined_fraction) ? std::string() : fmt(r.refined_fraction)) << ',' << fmt(r.ratio) << ','
           << fmt(r.km_bound) << ',' << fmt(r.implied_C) << '\n';
        if (r.measure > 0) series.points.emplace_back(r.eps, r.measure / cfg.B.length());
      }
      fits << param(Q) << ',' << param(psi) << ',' << fmt(alpha) << ','
           << (std::isnan(t.slope) ? std::string() : fmt(t.slope)) << ',' << fmt(t.slope_r_squared) << ','
           << t.slope_points << ',' << (t.nonincreasing ? 1 : 0) << '\n';
      if (!std::isnan(t.slope)) {
        std::vector<std::pair<double, double>> in_range;
        for (const auto& pt : series.points)
          if (opt.fit_range.contains(pt.first)) in_range.push_back(pt);
        const ScalingFit f = scaling_fit(in_range);
        series.has_fit = true;
        series.slope = f.slope;
        series.intercept = f.intercept;
      }
      plot.push_back(std::move(series));
      if (!t.nonincreasing) ctx.fail("bad-set measure increases as eps decreases at Q=" + param(Q));
    }
  if (cfg.svg) {
    auto s = ctx.open("qnd.svg");
    write_loglog_svg(s, "bad-set fraction against eps (" + ctx.curve.label() + ")", "eps", "fraction", plot);
  }
}

inline void run_identities(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> xs(cfg.B.lo, cfg.B.hi);
  const int n = ctx.curve.n();
  std::vector<IdentityStats> stats;

  const ApproxParams p = ctx.params(cfg.Q_list.front(), cfg.psi_list.front());
  IdentityStats detG{"det_G", cfg.identity_draws, 0.0, 1e-9}, deth{"det_h", cfg.identity_draws, 0.0, 1e-9};
  for (int k = 0; k < cfg.identity_draws; ++k) {
    const double x = xs(rng);
    detG.max_error = std::max(detG.max_error, std::abs(std::abs(build_G(ctx.curve, x).determinant()) - 1.0));
    deth.max_error = std::max(deth.max_error, std::abs(std::abs(build_h(ctx.curve, x, p).determinant()) - 1.0));
  }
  stats.push_back(detG);
  stats.push_back(deth);

  for (ClosedFormCase kind : {ClosedFormCase::Affine, ClosedFormCase::Derivative, ClosedFormCase::SkewGradient})
    stats.push_back(closed_form_sweep(ctx.curve, cfg.B, kind, cfg.identity_draws, rng));

  // Scale factors: det(h_I Gamma) = c^{r/(n+1)} Phi_I phi_{I,Gamma} on random I and Gamma.
  IdentityStats scale{"scale_factor", cfg.identity_draws, 0.0, 1e-9};
  IdentityStats hodge{"hodge_norm_mismatches", cfg.identity_draws, 0.0, 0.0};
  std::uniform_int_distribution<int> pick_r(1, n);
  for (int k = 0; k < cfg.identity_draws; ++k) {
    const int r = pick_r(rng);
    std::vector<int> all(static_cast<std::size_t>(n + 1));
    std::iota(all.begin(), all.end(), 1);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<int> I(all.begin(), all.begin() + r);
    std::sort(I.begin(), I.end());
    const MinorSpec spec{I, random_full_rank(rng, n + 1, r, -3, 3)};
    const double x = xs(rng);
    const Eigen::MatrixXd h = build_h(ctx.curve, x, p);
    Eigen::MatrixXd hI(r, n + 1);
    for (int i = 0; i < r; ++i) hI.row(i) = h.row(I[static_cast<std::size_t>(i)] - 1);
    const double lhs = (hI * spec.Gamma.cast<double>()).determinant();
    const double rhs = std::pow(p.c, static_cast<double>(r) / (n + 1)) * scale_factor(I, p) * phi_minor(ctx.curve, x, spec);
    scale.max_error = std::max(scale.max_error, relative_error(lhs, rhs));
    const IntMatrix dual = hodge_dual_basis(spec.Gamma);
    const IntMatrix prod = spec.Gamma.transpose() * dual;
    if (!prod.isZero() || wedge_columns(dual).squared_norm() != wedge_columns(spec.Gamma).squared_norm())
      hodge.max_error += 1.0;
  }
  stats.push_back(scale);
  stats.push_back(hodge);

  auto os = ctx.open("identities.csv");
  os << "check,draws,max_error,tolerance,passed\n";
  for (const auto& s : stats) {
    os << s.name << ',' << s.draws << ',' << fmt(s.max_error) << ',' << param(s.tolerance) << ','
       << (s.passed() ? 1 : 0) << '\n';
    if (!s.passed()) ctx.fail(s.name);
  }
}

}  // namespace detail

/// Runs one configured experiment; outputs depend only on the config and seed.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  Curve curve = [&] {
    try {
      return curve_from_name(cfg.curve, cfg.domain);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config key 'curve': ") + e.what());
    }
  }();
  if (!curve.domain().contains(cfg.B)) throw PreconditionError("B = " + to_string(cfg.B) + " not inside the curve domain");
  if (!cfg.gamma.empty() && static_cast<int>(cfg.gamma.size()) != curve.m())
    throw ConfigError("config key 'theta.gamma': needs one value per coordinate function");

  detail::RunContext ctx{cfg, curve, 0.0, {}, {}, {}, {}, {}};
  if (cfg.M) {
    ctx.M = *cfg.M;
    ctx.M_source = "config";
  } else {
    ctx.M = second_derivative_bound(curve, cfg.B, 10000, cfg.M_safety);
    ctx.M_source = "grid estimate on B";
  }
  ctx.k = derive_constants(curve.n(), 1, curve.m(), ctx.M, cfg.c);
  ctx.dir = cfg.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(ctx.dir, ec);
  if (ec || !std::filesystem::is_directory(ctx.dir))
    throw ConfigError("config key 'output_dir': cannot create '" + cfg.output_dir + "'");

  switch (cfg.mode) {
    case Mode::Count: detail::run_count(ctx); break;
    case Mode::Scaling: detail::run_scaling(ctx); break;
    case Mode::Coverage: detail::run_coverage(ctx); break;
    case Mode::Detect: detail::run_detect(ctx); break;
    case Mode::GoodSet: detail::run_goodset(ctx); break;
    case Mode::Qnd: detail::run_qnd(ctx); break;
    case Mode::Identities: detail::run_identities(ctx); break;
  }

  auto& mf = ctx.manifest;
  mf["mode"] = to_string(cfg.mode);
  mf["curve"] = curve.label();
  mf["n"] = curve.n();
  mf["B"] = {cfg.B.lo, cfg.B.hi};
  mf["theta"] = {{"lambda", cfg.lambda}, {"gamma", cfg.gamma}};
  mf["c"] = cfg.c;
  mf["seed"] = cfg.seed;
  mf["precision"] = cfg.extended ? "extended" : "double";
  mf["M"] = ctx.M;
  mf["M_source"] = ctx.M_source;
  mf["K0"] = ctx.k.K0;
  mf["C0"] = ctx.k.C0;
  auto cells = nlohmann::ordered_json::array();
  for (double Q : cfg.Q_list)
    for (double psi : cfg.psi_list)
      cells.push_back({{"Q", Q}, {"psi", psi}, {"rho", ctx.k.rho(Q, psi)}, {"omega0", ctx.k.omega0(Q)}});
  mf["cells"] = cells;
  mf["files"] = ctx.result.files;
  mf["checks_passed"] = ctx.result.checks_passed;
  mf["notes"] = ctx.result.notes;
  {
    std::ofstream os(ctx.dir / "manifest.json", std::ios::binary);
    if (!os) throw ConfigError("cannot write manifest in '" + cfg.output_dir + "'");
    os << mf.dump(2) << '\n';
  }
  ctx.result.files.push_back("manifest.json");
  return ctx.result;
}

}  // namespace ratpts
