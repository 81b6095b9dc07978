#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "ratpts/exponents.hpp"
#include "ratpts/harness.hpp"

using namespace ratpts;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ratpts_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  ExperimentConfig cfg;
  parse_config_text(cfg, "mode = scaling  # fit exponents\n\ncurve = veronese:3\nB = 0.2, 0.8\nQ_list = 64, 128\n"
                         "psi_list = 0.2,0.4\nseed = 9\nprecision = extended\nsvg = true\n");
  EXPECT_EQ(cfg.mode, Mode::Scaling);
  EXPECT_EQ(cfg.curve, "veronese:3");
  EXPECT_DOUBLE_EQ(cfg.B.lo, 0.2);
  EXPECT_DOUBLE_EQ(cfg.B.hi, 0.8);
  EXPECT_EQ(cfg.Q_list, (std::vector<double>{64, 128}));
  EXPECT_EQ(cfg.psi_list, (std::vector<double>{0.2, 0.4}));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_TRUE(cfg.extended);
  EXPECT_TRUE(cfg.svg);
}

TEST(Config, UnknownKeyNamed) {
  ExperimentConfig cfg;
  try {
    apply_assignment(cfg, "Q_lsit=1,2");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("Q_lsit"), std::string::npos);
  }
  EXPECT_THROW(apply_assignment(cfg, "mode=sideways"), ConfigError);
  EXPECT_THROW(apply_assignment(cfg, "jobs=0"), ConfigError);
  EXPECT_THROW(apply_assignment(cfg, "c=abc"), ConfigError);
  EXPECT_THROW(parse_config_text(cfg, "just words\n"), ConfigError);
}

TEST(Config, CrossFieldValidation) {
  ExperimentConfig cfg;
  cfg.Q_list = {128, 64};
  EXPECT_THROW(validate_config(cfg), ConfigError);
  cfg.Q_list = {64.5};
  EXPECT_THROW(validate_config(cfg), ConfigError);
  cfg.mode = Mode::Detect;
  EXPECT_NO_THROW(validate_config(cfg));
  cfg.psi_list = {1.5};
  EXPECT_THROW(validate_config(cfg), ConfigError);
  cfg.psi_list = {0.3};
  cfg.qnd_eps = {0.01, 0.1};
  EXPECT_THROW(validate_config(cfg), ConfigError);
}

TEST(RunExperiment, DeterministicCountOutputs) {
  ExperimentConfig cfg;
  cfg.Q_list = {10, 20};
  cfg.psi_list = {0.5};
  cfg.B = {0, 1};
  const auto dir_a = scratch("count_a"), dir_b = scratch("count_b");
  cfg.output_dir = dir_a.string();
  const ExperimentResult a = run_experiment(cfg);
  cfg.output_dir = dir_b.string();
  cfg.jobs = 3;
  const ExperimentResult b = run_experiment(cfg);
  ASSERT_EQ(a.files, b.files);
  for (const auto& f : a.files)
    EXPECT_EQ(slurp(dir_a / f), slurp(dir_b / f)) << f;
  const auto manifest = nlohmann::json::parse(slurp(dir_b / "manifest.json"));
  EXPECT_EQ(manifest["mode"], "count");
  EXPECT_EQ(manifest["cells"].size(), 2u);
  EXPECT_FALSE(manifest.contains("jobs"));
  EXPECT_NE(slurp(dir_b / "count_summary.csv").find("10,0.5,41,"), std::string::npos);
}

TEST(RunExperiment, RejectsBadCurveAndDomain) {
  ExperimentConfig cfg;
  cfg.output_dir = scratch("bad").string();
  cfg.curve = "hyperbola";
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  cfg.curve = "parabola";
  cfg.B = {5, 6};
  EXPECT_THROW(run_experiment(cfg), PreconditionError);
}

TEST(RunExperiment, IdentitiesPass) {
  ExperimentConfig cfg;
  cfg.mode = Mode::Identities;
  cfg.curve = "veronese:3";
  cfg.identity_draws = 50;
  cfg.output_dir = scratch("identities").string();
  EXPECT_TRUE(run_experiment(cfg).checks_passed);
}

TEST(DimExponent, Examples) {
  EXPECT_EQ(dim_exponent_rational(2, 3, 4), (Rational{5, 7}));
  EXPECT_EQ(to_string(dim_exponent_rational(2, 3, 4)), "5/7");
  const DimResult r = dim_exponent(2, 0.75);
  EXPECT_NEAR(r.lower_bound, 5.0 / 7.0, 1e-15);
  EXPECT_TRUE(r.in_range);
  EXPECT_TRUE(r.literal_range_empty);
  EXPECT_EQ(r.notice, "paper-range-empty");
  EXPECT_TRUE(dim_exponent(2, 1.0).above_range);
  EXPECT_FALSE(dim_exponent(2, 0.4).in_range);
  EXPECT_THROW(dim_exponent(1, 0.5), PreconditionError);
}

TEST(DimExponent, DirichletEndpointGivesOne) {
  for (int n = 2; n <= 10; ++n) {
    EXPECT_EQ(dim_exponent_rational(n, 1, n), (Rational{1, 1})) << n;
    EXPECT_NEAR(dim_exponent(n, 1.0 / n).lower_bound, 1.0, 1e-12);
  }
}

TEST(DivergenceSum, Examples) {
  const DivergenceSum z4 = divergence_partial_sum(2.0, 1.0, 2, 100000);
  EXPECT_NEAR(z4.partial_sum, std::pow(std::numbers::pi, 4) / 90.0, 1e-3);
  EXPECT_EQ(z4.verdict, SeriesVerdict::Converges);
  // exponent -1: the harmonic series.
  const DivergenceSum h = divergence_partial_sum(0.5, 1.0, 2, 1000);
  EXPECT_DOUBLE_EQ(h.exponent, -1.0);
  EXPECT_NEAR(h.partial_sum, 7.485470860550345, 1e-12);
  EXPECT_TRUE(h.boundary);
  EXPECT_EQ(h.verdict, SeriesVerdict::Diverges);
  EXPECT_EQ(divergence_partial_sum(0.1, 1.0, 2, 100).verdict, SeriesVerdict::Diverges);
  EXPECT_THROW(divergence_partial_sum(1.0, 1.0, 2, 5), PreconditionError);
}
