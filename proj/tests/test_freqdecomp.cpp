#include <gtest/gtest.h>

#include <cmath>

#include "modlab/freqdecomp.hpp"
#include "oracles.hpp"

using namespace modlab;

namespace {

const Partition& part() {
  static const Partition P = build_partition();
  return P;
}

// Modulated Gaussian whose spectrum sits well inside the grid band.
ComplexField packet(const Grid& g, double k1, double k2, double width) {
  return sample(g, [&](const double* x) {
    const double r2 = x[0] * x[0] + (g.dim > 1 ? x[1] * x[1] : 0.0);
    const double ph = k1 * x[0] + (g.dim > 1 ? k2 * x[1] : 0.0);
    return std::polar(std::exp(-r2 / (2 * width * width)), ph);
  });
}

}  // namespace

TEST(Bump, ValuesAndSupport) {
  EXPECT_DOUBLE_EQ(bump_psi(0.0), std::exp(-1.0));
  EXPECT_EQ(bump_psi(1.0), 0.0);
  EXPECT_EQ(bump_psi(-1.5), 0.0);
  EXPECT_DOUBLE_EQ(bump_psi(0.3), bump_psi(-0.3));
}

TEST(Partition, EtaSumsToOneOnTheLine) {
  const Partition& P = part();
  Rng rng(3);
  for (int n = 0; n < 200; ++n) {
    const double xi = rng.uniform(-5.0, 5.0);
    double s = 0.0;
    for (int j = -8; j <= 8; ++j) s += P.eta(xi - j);
    EXPECT_NEAR(s, 1.0, 1e-14);
    EXPECT_NEAR(P.eta(xi), bump_psi(xi) / (bump_psi(xi - std::floor(xi)) + bump_psi(xi - std::floor(xi) - 1.0)),
                1e-15);
  }
  EXPECT_EQ(P.eta(1.0), 0.0);
  EXPECT_FALSE(P.construction().empty());
}

TEST(Partition, SigmaIsTensorProduct) {
  const Partition& P = part();
  const double xi[2] = {3.2, -0.7};
  const LatticePoint k{3, -1, 0};
  EXPECT_DOUBLE_EQ(P.sigma(k, xi, 2), P.eta(0.2) * P.eta(0.3));
}

TEST(Partition, DefectOnGrid) {
  const Grid g = make_grid({4.0, 6.0}, {64, 96});
  EXPECT_LT(partition_defect(g, part()), 1e-12);
}

TEST(Lattice, CountAndOrder) {
  const Grid g = make_grid({2.0 * oracle::pi, oracle::pi}, {32, 24});
  const auto pts = lattice(g);
  const int k0 = g.k_max(0), k1 = g.k_max(1);
  ASSERT_EQ(pts.size(), static_cast<std::size_t>((2 * k0 + 1) * (2 * k1 + 1)));
  EXPECT_EQ(pts.front()[0], -k0);
  EXPECT_EQ(pts.front()[1], -k1);
  EXPECT_EQ(pts[1][1], -k1 + 1);
  EXPECT_DOUBLE_EQ(japanese({3, 4, 0}, 2), std::sqrt(26.0));
}

TEST(Box, SpectrumIsSigmaTimesTransform) {
  const Grid g = make_grid({4.0, 4.0}, {48, 48});
  const ComplexField f = oracle::random_field(g, 8);
  const ComplexField fh = fourier_forward(f);
  const LatticePoint k{2, -3, 0};
  const ComplexField got = box_spectrum(k, fh, part());
  const ComplexField want = sample_spectrum(g, [&](const double* xi) { return part().sigma(k, xi, 2); });
  double worst = 0.0;
  for (std::size_t i = 0; i < fh.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i] * fh[i]));
  EXPECT_LT(worst, 1e-12);
  std::vector<cplx> into(fh.size(), cplx{7.0, 7.0});
  box_spectrum_into(k, fh, part(), into);
  EXPECT_LT(oracle::max_abs_diff(ComplexField(g, into), got), 1e-15);
  EXPECT_LT(oracle::max_abs_diff(box_op(k, f, part()), fourier_inverse(got)), 1e-12);
}

TEST(Box, RejectsUnresolvedLatticePoint) {
  const Grid g = make_grid(1, 4.0, 32);
  const ComplexField fh = fourier_forward(oracle::random_field(g, 1));
  EXPECT_THROW(box_spectrum({40, 0, 0}, fh, part()), ValidationError);
}

TEST(Reconstruction, BandLimitedFamily) {
  const Grid g = make_grid({4.0 * oracle::pi, 4.0 * oracle::pi}, {128, 128});
  Rng rng(12);
  for (int n = 0; n < 6; ++n) {
    const ComplexField f = packet(g, rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(1.0, 1.6));
    EXPECT_LT(l2_norm(reconstruct(f, part()) - f), 1e-10 * l2_norm(f));
  }
}

TEST(ModulationNorm, MatchesBoxByBoxQuadrature) {
  const Grid g = make_grid({3.0 * oracle::pi, 2.0 * oracle::pi}, {64, 48});
  const ComplexField f = packet(g, 2.5, -1.0, 1.2);
  const auto pts = lattice(g);
  for (const NormSpec spec : {NormSpec{0.0, 2.0, 2.0}, NormSpec{0.5, 1.0, 1.0}, NormSpec{1.0, 2.0, 1.0},
                              NormSpec{-0.5, 4.0, 3.0}, NormSpec{0.5, 2.0, kInf}}) {
    double acc = 0.0;
    for (const auto& k : pts) {
      const double w = std::pow(japanese(k, 2), spec.s);
      const double b = lp_norm(box_op(k, f, part()), spec.p) * w;
      acc = std::isinf(spec.q) ? std::max(acc, b) : acc + std::pow(b, spec.q);
    }
    const double want = std::isinf(spec.q) ? acc : std::pow(acc, 1.0 / spec.q);
    EXPECT_NEAR(modulation_norm(f, spec, part()), want, 1e-9 * want) << spec.s << ' ' << spec.p << ' ' << spec.q;
  }
}

TEST(ModulationNorm, BoxNormsAlignWithLattice) {
  const Grid g = make_grid(1, 3.0 * oracle::pi, 64);
  const ComplexField f = packet(g, 3.0, 0.0, 2.0);
  const auto pts = lattice(g);
  const auto norms = box_norms(f, 2.0, part());
  ASSERT_EQ(norms.size(), pts.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < norms.size(); ++i)
    if (norms[i] > norms[arg]) arg = i;
  EXPECT_EQ(pts[arg][0], 3);
  EXPECT_THROW(box_norms(f, 0.5, part()), ValidationError);
}

TEST(ModulationNorm, StftRealizationIsEquivalent) {
  const Grid g = make_grid({3.0 * oracle::pi, 3.0 * oracle::pi}, {64, 64});
  Rng rng(4);
  const NormSpec spec{0.5, 2.0, 1.0};
  double lo = 1e300, hi = 0.0;
  for (int n = 0; n < 5; ++n) {
    const ComplexField f = packet(g, rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(1.0, 2.5));
    const double r = modulation_norm(f, spec, part()) / stft_modulation_norm(f, spec);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  EXPECT_GT(lo, 0.01);
  EXPECT_LT(hi / lo, 3.0);
  const ComplexField f = packet(g, 1.0, 1.0, 1.5);
  EXPECT_NEAR(stft_modulation_norm(cplx{0.0, 2.0} * f, spec), 2.0 * stft_modulation_norm(f, spec),
              1e-12 * stft_modulation_norm(f, spec));
}

TEST(Symmetry, ConjugateBox) {
  const Grid g = make_grid({4.0, 4.0}, {48, 48});
  const ComplexField f = oracle::random_field(g, 21);
  EXPECT_TRUE(conj_box_symmetry_check(f, {1, -2, 0}, part()));
  EXPECT_TRUE(conj_box_symmetry_check(f, {0, 3, 0}, part()));
}

TEST(ProductSupport, FarBoxesVanish) {
  const Grid g = make_grid(1, 4.0 * oracle::pi, 128);
  const ComplexField u = oracle::random_field(g, 2);
  const std::vector<LatticePoint> factors{{3, 0, 0}, {-1, 0, 0}};
  EXPECT_TRUE(product_support_check({9, 0, 0}, factors, {u, u}, part()));
  EXPECT_LT(product_support_residual({9, 0, 0}, factors, {u, u}, part()), 1e-12);
  EXPECT_GT(product_support_residual({2, 0, 0}, factors, {u, u}, part()), 1e-6);
  EXPECT_THROW(product_support_residual({9, 0, 0}, factors, {u, u}, part(), 1), ValidationError);
}

TEST(DirectionTransfer, RatioBoundedByBoxGeometry) {
  const Grid g = make_grid({2.0 * oracle::pi, 2.0 * oracle::pi}, {128, 128});
  const ComplexField f = oracle::random_field(g, 6);
  const double r = direction_transfer_check(f, {24, 5, 0}, part());
  EXPECT_GT(r, 4.0 / 25.0);
  EXPECT_LT(r, 6.0 / 23.0);
  EXPECT_THROW(direction_transfer_check(f, {10, 5, 0}, part()), ValidationError);
}
