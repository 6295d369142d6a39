#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "modlab/gabor.hpp"
#include "oracles.hpp"

using namespace modlab;

namespace {

Grid grid1d() { return make_grid(1, 8.0 * oracle::pi, 128); }

FrameCoefficients random_coefficients(int dim, const FrameTruncation& tr, int count, int kmax, int lmax,
                                      std::uint64_t seed) {
  Rng rng(seed);
  FrameCoefficients c = FrameCoefficients::zeros(dim, tr);
  for (int n = 0; n < count; ++n) {
    LatticePoint k{0, 0, 0}, l{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      k[a] = rng.integer(-kmax, kmax);
      l[a] = rng.integer(-lmax, lmax);
    }
    c.at(k, l) += rng.complex_normal();
  }
  return c;
}

}  // namespace

TEST(Coefficients, IndexingRoundTrip) {
  const FrameCoefficients c = FrameCoefficients::zeros(2, {3, 2});
  EXPECT_EQ(c.k_side(), 7);
  EXPECT_EQ(c.l_side(), 5);
  EXPECT_EQ(c.l_count(), 25u);
  EXPECT_EQ(c.c.size(), 49u * 25u);
  for (std::size_t i = 0; i < c.c.size(); i += 37) EXPECT_EQ(c.index(c.k_of(i), c.l_of(i)), i);
  EXPECT_EQ(c.index({-3, -3, 0}, {-2, -2, 0}), 0u);
  EXPECT_THROW(FrameCoefficients::zeros(2, {-1, 2}), ValidationError);
}

TEST(Atoms, ClosedForm) {
  const Grid g = make_grid({8.0, 8.0}, {32, 32});
  const ComplexField a = gauss_atom({2, -1, 0}, {1, 0, 0}, g);
  const ComplexField want = sample(g, [](const double* x) {
    return std::exp(-0.5 * ((x[0] - 1) * (x[0] - 1) + x[1] * x[1])) * std::polar(1.0, 2 * x[0] - x[1]);
  });
  EXPECT_LT(oracle::max_abs_diff(a, want), 1e-15);
  EXPECT_THROW(gauss_atom({0, 0, 0}, {5, 0, 0}, g), ValidationError);
}

TEST(Analysis, MatchesInnerProducts) {
  const Grid g = grid1d();
  const FrameTruncation tr = default_truncation(g);
  const ComplexField f = oracle::gaussian(g, 2.0);
  const FrameCoefficients c = analysis_coefficients(f, tr);
  for (const auto& [k, l] : {std::pair<LatticePoint, LatticePoint>{{0, 0, 0}, {0, 0, 0}},
                             {{3, 0, 0}, {-4, 0, 0}},
                             {{-tr.K, 0, 0}, {tr.L_rad, 0, 0}}}) {
    const cplx want = inner_product(f, gauss_atom(k, l, g));
    EXPECT_LT(std::abs(c.at(k, l) - want), 1e-12) << k[0] << ' ' << l[0];
  }
}

TEST(Synthesis, IsSumOfAtoms) {
  const Grid g = make_grid({4.0 * oracle::pi, 4.0 * oracle::pi}, {64, 64});
  const FrameTruncation tr = default_truncation(g);
  const FrameCoefficients c = random_coefficients(2, tr, 5, 3, 1, 4);
  ComplexField want(g);
  for (std::size_t i = 0; i < c.c.size(); ++i) {
    if (c.c[i] != cplx{}) want += c.c[i] * gauss_atom(c.k_of(i), c.l_of(i), g);
  }
  EXPECT_LT(oracle::max_abs_diff(synthesize(c, g), want), 1e-12);
}

TEST(FrameOperator, EqualsSynthesisOfAnalysis) {
  const Grid g = grid1d();
  const FrameTruncation tr = default_truncation(g);
  const ComplexField f = oracle::gaussian(g, 1.5);
  bool warn = true;
  const ComplexField Sf = frame_operator_apply(f, tr, &warn);
  EXPECT_LT(oracle::max_abs_diff(Sf, synthesize(analysis_coefficients(f, tr), g)), 1e-12);
  EXPECT_FALSE(warn);
  const ComplexField edge = sample(g, [](const double* x) { return cplx{std::exp(-(x[0] - 24) * (x[0] - 24)), 0.0}; });
  frame_operator_apply(edge, tr, &warn);
  EXPECT_TRUE(warn);
}

TEST(Analyze, RoundTripOnAtomSuperpositions) {
  const Grid g = make_grid(1, 8.0 * oracle::pi, 512);
  const FrameTruncation tr = default_truncation(g);
  const ComplexField f = synthesize(random_coefficients(1, tr, 10, 3, 6, 18), g);
  const FrameCoefficients can = analyze(f, tr);
  EXPECT_LT(l2_norm(synthesize(can, g) - f), 1e-8 * l2_norm(f));
}

TEST(FrameOperator, SelfAdjointIn2D) {
  const Grid g = make_grid({4.0 * oracle::pi, 4.0 * oracle::pi}, {64, 64});
  const FrameTruncation tr = default_truncation(g);
  const ComplexField f = oracle::random_field(g, 1);
  const ComplexField h = oracle::random_field(g, 2);
  const cplx a = inner_product(frame_operator_apply(f, tr), h);
  const cplx b = inner_product(f, frame_operator_apply(h, tr));
  EXPECT_LT(std::abs(a - b), 1e-12 * std::abs(a));
  EXPECT_GT(inner_product(frame_operator_apply(f, tr), f).real(), 0.0);
}

TEST(Analyze, ReportsNonConvergence) {
  const Grid g = grid1d();
  const ComplexField f = oracle::gaussian(g, 1.0);
  AnalyzeOptions opts;
  opts.max_iterations = 1;
  opts.tolerance = 1e-14;
  EXPECT_THROW(analyze(f, default_truncation(g), opts), NumericalError);
  EXPECT_EQ(analyze(ComplexField(g), default_truncation(g)).c.size(),
            FrameCoefficients::zeros(1, default_truncation(g)).c.size());
}

TEST(FrameBounds, BoundRayleighQuotients) {
  const Grid g = grid1d();
  const FrameTruncation tr = default_truncation(g);
  const FrameBounds fb = frame_bounds(g, tr);
  ASSERT_GT(fb.A, 0.0);
  ASSERT_GE(fb.B, fb.A);
  EXPECT_GT(fb.subspace_dim, 0);
  const auto packets = frame_test_packets(g, tr);
  Rng rng(2);
  for (int n = 0; n < 8; ++n) {
    ComplexField f(g);
    for (const auto& p : packets) f += rng.complex_normal() * p;
    const double q = inner_product(frame_operator_apply(f, tr), f).real() / std::pow(l2_norm(f), 2);
    EXPECT_GE(q, fb.A * (1 - 1e-9));
    EXPECT_LE(q, fb.B * (1 + 1e-9));
  }
}

TEST(FrameBounds, DegenerateTruncationFails) {
  EXPECT_THROW(frame_bounds(grid1d(), {0, 0}), NumericalError);
}

TEST(CoefficientNorm, MatchesDefinition) {
  const FrameTruncation tr{2, 1};
  FrameCoefficients c = FrameCoefficients::zeros(1, tr);
  c.at({1, 0, 0}, {0, 0, 0}) = 3.0;
  c.at({1, 0, 0}, {1, 0, 0}) = cplx{0, 4.0};
  c.at({-2, 0, 0}, {-1, 0, 0}) = 1.0;
  const NormSpec spec{1.0, 2.0, 1.0};
  EXPECT_NEAR(coefficient_norm(c, spec), std::sqrt(2.0) * 5.0 + std::sqrt(5.0) * 1.0, 1e-13);
  EXPECT_NEAR(coefficient_norm(c, {0.0, 1.0, kInf}), 7.0, 1e-13);
}

TEST(CoefficientIO, RoundTrip) {
  const FrameTruncation tr{3, 2};
  const FrameCoefficients c = random_coefficients(2, tr, 12, 3, 2, 9);
  std::stringstream ss;
  write_coefficients(ss, c);
  const FrameCoefficients back = read_coefficients(ss);
  EXPECT_EQ(back.dim, 2);
  EXPECT_EQ(back.trunc.K, 3);
  EXPECT_EQ(back.trunc.L_rad, 2);
  ASSERT_EQ(back.c.size(), c.c.size());
  for (std::size_t i = 0; i < c.c.size(); ++i) EXPECT_EQ(back.c[i], c.c[i]);
  std::stringstream bad("# something else\n");
  EXPECT_THROW(read_coefficients(bad), ValidationError);
}
