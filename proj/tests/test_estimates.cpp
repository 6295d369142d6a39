#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "modlab/estimates.hpp"
#include "oracles.hpp"

using namespace modlab;

namespace {

std::string validation_message(const EstimateConfig& cfg) {
  try {
    run_estimate_rows(cfg);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Slope, ExactPowerLaw) {
  const std::vector<double> x{3, 6, 12, 24, 48};
  std::vector<double> y;
  for (double v : x) y.push_back(2.5 * std::pow(v, -0.7));
  EXPECT_NEAR(loglog_slope(x, y), -0.7, 1e-13);
  EXPECT_THROW(loglog_slope({1.0}, {1.0}), ValidationError);
  EXPECT_THROW(loglog_slope({1.0, 2.0}, {1.0, 0.0}), ValidationError);
  EXPECT_THROW(loglog_slope({2.0, 2.0}, {1.0, 3.0}), ValidationError);
}

TEST(Cases, TableCoversAllFamilies) {
  const auto& cases = estimate_cases();
  std::set<char> letters;
  std::set<std::string> ids;
  for (const auto& c : cases) {
    letters.insert(c.label[0]);
    ids.insert(c.id);
  }
  EXPECT_EQ(letters, (std::set<char>{'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i'}));
  EXPECT_EQ(ids.size(), cases.size());
  EXPECT_EQ(find_estimate_case("maximal-smoothing").label, "g");
  EXPECT_TRUE(find_estimate_case("smooth-effect-duhamel").inhomogeneous);
  EXPECT_THROW(find_estimate_case("nope"), ValidationError);
}

TEST(Admissibility, RejectsOutOfRangeExponents) {
  EstimateConfig a = default_estimate_config("gabor-global");
  a.params.p = 2.0;
  a.params.pbar = 2.0;
  EXPECT_NE(validation_message(a).find("n(1/2 - 1/pbar) > 1/p"), std::string::npos);

  EstimateConfig f = default_estimate_config("l2-anisotropic");
  f.params.q = 2.0;
  f.params.qbar = kInf;
  EXPECT_NE(validation_message(f).find("n(1/2 - 2/qbar) > 2/q"), std::string::npos);

  EstimateConfig g = default_estimate_config("maximal-smoothing");
  g.k_list = {5, 10, 20, 40};
  EXPECT_NE(validation_message(g).find("|k_1| >= 20"), std::string::npos);

  EstimateConfig d = default_estimate_config("strichartz");
  d.params.strichartz_p = 1.0;
  EXPECT_NE(validation_message(d).find("4/n <= p"), std::string::npos);

  EstimateConfig i = default_estimate_config("gabor-general");
  i.params.r = 2.0;
  EXPECT_NE(validation_message(i).find("n(1/r - 1/2 - 1/pbar)"), std::string::npos);

  EstimateConfig e = default_estimate_config("smooth-maximal");
  e.params.q = 2.0;
  EXPECT_NE(validation_message(e).find("2 < q"), std::string::npos);
}

TEST(Admissibility, EqualityCaseIsAccepted) {
  // n(1/2 - 1/pbar) = 1/p with 1 < p < inf: p = 4, pbar = 4 in 2D.
  EstimateConfig a = default_estimate_config("gabor-global");
  a.params.p = 4.0;
  a.params.pbar = 4.0;
  a.k_list = {3, 6};
  a.family_size = 1;
  EXPECT_EQ(validation_message(a), "");
}

TEST(Convolution, DeltaSequenceClosedForm) {
  // a = delta_0: ||(1 + |x|/c)^{-theta}||_p = (2c / (theta p - 1))^{1/p}.
  const double theta = 1.5, p = 2.0, r = 1.0;
  for (double c : {1.0, 4.0, 32.0}) {
    const ConvolutionResult res = convolution_lemma_check({1.0}, 0, theta, p, r, 0.3, c);
    const double want = std::pow(2.0 * c / (theta * p - 1.0), 1.0 / p);
    EXPECT_NEAR(res.lhs, want, 1e-10 * want) << c;
    EXPECT_NEAR(res.rhs_scale, std::pow(1.0 + c * c, 0.25), 1e-12);
    EXPECT_NEAR(res.ratio, res.lhs / res.rhs_scale, 1e-15);
  }
}

TEST(Convolution, MatchesTrapezoidOnSeveralTerms) {
  const std::vector<double> a{0.5, -1.0, 0.0, 2.0, 0.25};
  const double theta = 1.2, p = 3.0, r = 2.0, b = 0.4, c = 2.5;
  const ConvolutionResult res = convolution_lemma_check(a, -2, theta, p, r, b, c);
  auto g = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i]) * std::pow(1.0 + std::abs(x - (i - 2.0) + b) / c, -theta);
    return std::pow(s, p);
  };
  const double X = 4000.0, h = 1e-3;
  double total = 0.0;
  for (double x = -X; x < X; x += h) total += 0.5 * h * (g(x) + g(x + h));
  // Power tails beyond |x| = X: the sum behaves like A (|x|/c)^{-theta p}.
  const double A = std::pow(1.75, p);
  total += 2.0 * A * std::pow(c, theta * p) * std::pow(X, 1.0 - theta * p) / (theta * p - 1.0);
  const double want = std::pow(total, 1.0 / p);
  EXPECT_NEAR(res.lhs, want, 2e-5 * want);
  const double anorm = std::sqrt(0.25 + 1.0 + 4.0 + 0.0625);
  EXPECT_NEAR(res.rhs_scale, std::pow(1.0 + c * c, 0.5 * (1.0 / 3.0 + 0.5)) * anorm, 1e-12);
}

TEST(Convolution, SupremumNorm) {
  const ConvolutionResult res = convolution_lemma_check({1.0, 1.0}, 0, 2.0, kInf, 1.0, 0.0, 1.0);
  EXPECT_NEAR(res.lhs, 1.0 + std::pow(2.0, -2.0), 1e-15);
}

TEST(Convolution, RejectsInadmissibleTriples) {
  EXPECT_THROW(convolution_lemma_check({1.0}, 0, 0.5, 2.0, 2.0, 0.0, 2.0), ValidationError);
  EXPECT_THROW(convolution_lemma_check({1.0}, 0, 2.0, 2.0, 2.0, 0.0, 0.5), ValidationError);
  EXPECT_THROW(convolution_lemma_check({1.0}, 0, 2.0, 1.0, 2.0, 0.0, 2.0), ValidationError);
  EXPECT_NO_THROW(convolution_lemma_check({1.0}, 0, 0.75, 4.0, 2.0, 0.0, 2.0));
}

TEST(Convolution, SweepSlopeFollowsExponent) {
  const ConvolutionSweep sw = convolution_sweep(2.0, 2.0, 2.0, {2, 4, 8, 16, 32, 64});
  EXPECT_DOUBLE_EQ(sw.exponent, 1.0);
  EXPECT_EQ(sw.sup_ratio.size(), 6u);
  EXPECT_LE(sw.slope, sw.exponent + 0.1);
  EXPECT_GT(sw.slope, 0.5);
}

TEST(Harness, SmoothEffectConstant) {
  // Free-flow smoothing: ||D^{1/2}_{x1} S(t) u0||_{L^inf_{x1} L^2_{x2,t}} <= 2^{-1/2} ||u0||_2, and truncating
  // the time window only lowers the left side.
  EstimateConfig cfg = default_estimate_config("smooth-effect");
  cfg.k_list = {3, 6, 12, 24};
  cfg.family_size = 3;
  const EstimateReport rep = run_estimate_rows(cfg);
  EXPECT_EQ(rep.rows.size(), 12u);
  EXPECT_EQ(rep.k_values, cfg.k_list);
  EXPECT_LE(rep.max_ratio, 1.0 / std::sqrt(2.0) + 1e-9);
  EXPECT_GT(rep.max_ratio, 0.3);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.forcing, "none");
    EXPECT_NEAR(row.ratio, row.lhs / row.rhs, 1e-12 * row.ratio);
  }
  std::ostringstream os;
  write_report_csv(os, rep);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "case,k,datum,family,forcing,window,lhs,rhs,ratio");
}

TEST(Harness, ResonantForcingRowsArePresent) {
  EstimateConfig cfg = default_estimate_config("smooth-effect-duhamel");
  cfg.k_list = {3, 6, 12, 24};
  cfg.family_size = 1;
  const EstimateReport rep = run_estimate_rows(cfg);
  std::set<std::string> forcings;
  for (const auto& row : rep.rows) forcings.insert(row.forcing);
  EXPECT_TRUE(forcings.count("resonant"));
  EXPECT_TRUE(forcings.count("constant"));
  EXPECT_TRUE(std::isfinite(rep.max_ratio));
}

TEST(Harness, NeedsFourPointsForSlope) {
  EstimateConfig cfg = default_estimate_config("strichartz");
  cfg.k_list = {3, 6, 12};
  EXPECT_THROW(run_estimate(cfg), ValidationError);
}
