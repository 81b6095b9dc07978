#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratpts/exponents.hpp"
#include "ratpts/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kPrecondition = 2, kCheckFailed = 3 };

struct RunFlags {
  std::string config;
  std::string out;
  long long seed = -1;
  int jobs = 0;
  std::string precision;
  std::vector<std::string> sets;
};

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--config", f.config, "Config file of key = value lines");
  sub->add_option("--out", f.out, "Output directory (overrides output_dir)");
  sub->add_option("--seed", f.seed, "Random seed (overrides seed)");
  sub->add_option("--jobs", f.jobs, "Worker threads (overrides jobs)");
  sub->add_option("--precision", f.precision, "double or extended")->check(CLI::IsMember({"double", "extended"}));
  sub->add_option("--set", f.sets, "Extra key=value settings, applied last");
}

int run_mode(ratpts::Mode mode, const RunFlags& f) {
  ratpts::ExperimentConfig cfg;
  if (!f.config.empty()) cfg = ratpts::load_config(f.config);
  cfg.mode = mode;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.jobs > 0) cfg.jobs = f.jobs;
  if (!f.precision.empty()) cfg.extended = f.precision == "extended";
  for (const auto& s : f.sets) ratpts::apply_assignment(cfg, s);
  if (cfg.mode != mode) throw ratpts::ConfigError(std::string("config mode conflicts with subcommand '") +
                                                  ratpts::to_string(mode) + "'");
  const ratpts::ExperimentResult r = ratpts::run_experiment(cfg);
  for (const auto& file : r.files) std::cout << "wrote " << cfg.output_dir << '/' << file << '\n';
  for (const auto& note : r.notes) std::cout << note << '\n';
  std::cout << (r.checks_passed ? "checks passed" : "checks FAILED") << '\n';
  return r.checks_passed ? kOk : kCheckFailed;
}

// "3/4" or a decimal.
bool parse_tau(const std::string& text, double& tau, long long& p, long long& q) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      tau = std::stod(text);
      p = q = 0;
    } else {
      p = std::stoll(text.substr(0, slash));
      q = std::stoll(text.substr(slash + 1));
      if (q == 0) return false;
      tau = static_cast<double>(p) / static_cast<double>(q);
    }
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rational points near curves: detection, counting and goodness experiments"};
  app.require_subcommand(1);

  struct ModeCommand {
    ratpts::Mode mode;
    const char* help;
  };
  const std::vector<ModeCommand> modes = {
      {ratpts::Mode::Count, "Enumerate R(Q, psi, B, theta) and write the triples"},
      {ratpts::Mode::Detect, "Extract and verify witnesses over a grid of B"},
      {ratpts::Mode::Coverage, "Measure the union of rho-balls around the counted points"},
      {ratpts::Mode::GoodSet, "Fraction of B where the scaled lattice has no short vector"},
      {ratpts::Mode::Qnd, "Measure of the set where delta(h(x)) <= eps"},
      {ratpts::Mode::Identities, "Determinant, closed-form, Hodge and scale-factor identities"},
      {ratpts::Mode::Scaling, "Counts over the (Q, psi) grid with power-law fits and lower bounds"},
  };
  std::vector<RunFlags> flags(modes.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    subs.push_back(app.add_subcommand(ratpts::to_string(modes[i].mode), modes[i].help));
    add_run_flags(subs.back(), flags[i]);
  }

  int dim_n = 2;
  std::string dim_tau;
  auto* dim = app.add_subcommand("dim", "Dimension lower bound (n+1)/(tau+1) - n + 1");
  dim->add_option("--n", dim_n, "Ambient dimension")->required();
  dim->add_option("--tau", dim_tau, "Lower order of psi, decimal or p/q")->required();

  int div_n = 2;
  double div_tau = 1.0, div_s = 1.0;
  long long div_N = 1000;
  auto* divsum = app.add_subcommand("divsum", "Partial sums of sum q^n (psi(q)/q)^{s+n-1} with psi(q) = q^-tau");
  divsum->add_option("--n", div_n, "Ambient dimension")->required();
  divsum->add_option("--tau", div_tau, "Decay exponent of psi")->required();
  divsum->add_option("--s", div_s, "Dimension parameter")->required();
  divsum->add_option("--N", div_N, "Number of terms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    for (std::size_t i = 0; i < modes.size(); ++i)
      if (subs[i]->parsed()) return run_mode(modes[i].mode, flags[i]);

    if (dim->parsed()) {
      double tau = 0.0;
      long long p = 0, q = 0;
      if (!parse_tau(dim_tau, tau, p, q)) throw ratpts::ConfigError("--tau: expected a decimal or p/q");
      const ratpts::DimResult r = ratpts::dim_exponent(dim_n, tau);
      std::printf("n=%d tau=%.17g lower_bound=%.17g in_range=%s\n", r.n, r.tau, r.lower_bound,
                  r.in_range ? "true" : "false");
      if (q != 0) std::printf("exact=%s\n", ratpts::to_string(ratpts::dim_exponent_rational(dim_n, p, q)).c_str());
      if (r.above_range) std::printf("notice: tau >= 3/(2n-1), outside the range of the lower bound\n");
      if (!r.notice.empty()) std::printf("notice: %s\n", r.notice.c_str());
      return kOk;
    }
    if (divsum->parsed()) {
      const ratpts::DivergenceSum r = ratpts::divergence_partial_sum(div_tau, div_s, div_n, div_N);
      std::printf("exponent=%.17g partial_sum=%.17g verdict=%s%s\n", r.exponent, r.partial_sum,
                  ratpts::to_string(r.verdict), r.boundary ? " (boundary)" : "");
      return kOk;
    }
  } catch (const ratpts::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ratpts::PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return kPrecondition;
  }
  return kOk;
}
