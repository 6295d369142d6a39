#include <gtest/gtest.h>

#include <cmath>

#include "modlab/fields.hpp"
#include "oracles.hpp"

using namespace modlab;
using oracle::pi;

TEST(Grid, NodesAndFrequencies) {
  const Grid g = make_grid(1, 4.0, 16);
  EXPECT_DOUBLE_EQ(g.x(0, 0), -4.0);
  EXPECT_DOUBLE_EQ(g.dx(0), 0.5);
  EXPECT_DOUBLE_EQ(g.xi(0, 8), 0.0);
  EXPECT_DOUBLE_EQ(g.xi(0, 0), -8.0 * pi / 4.0);
  EXPECT_EQ(g.size(), 16u);
}

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(make_grid(1, 4.0, 17), ValidationError);
  EXPECT_THROW(make_grid(1, 4.0, 8), ValidationError);
  EXPECT_THROW(make_grid(4, 4.0, 16), ValidationError);
  EXPECT_THROW(make_grid({1.0, 2.0}, {16}), ValidationError);
  EXPECT_THROW(make_grid(1, -1.0, 16), ValidationError);
}

TEST(Signature, QuadraticForm) {
  const Signature s = Signature::from({1, -1});
  const double xi[2] = {2.0, 1.0};
  EXPECT_DOUBLE_EQ(s.quadratic(xi), 3.0);
  EXPECT_DOUBLE_EQ(Signature::elliptic(2).quadratic(xi), 5.0);
  EXPECT_THROW(Signature::from({1, 0}), ValidationError);
}

TEST(Fourier, MatchesDirectSum2D) {
  const Grid g = make_grid({3.0, 2.0}, {16, 18});
  const ComplexField f = oracle::random_field(g, 5);
  const ComplexField fast = fourier_forward(f);
  const ComplexField slow = oracle::naive_dft(f);
  EXPECT_LT(oracle::max_abs_diff(fast, slow), 1e-11);
}

TEST(Fourier, MatchesDirectSum3D) {
  const Grid g = make_grid({1.0, 1.5, 2.0}, {16, 16, 16});
  const ComplexField f = oracle::random_field(g, 9);
  EXPECT_LT(oracle::max_abs_diff(fourier_forward(f), oracle::naive_dft(f)), 1e-10);
}

TEST(Fourier, GaussianTransform) {
  for (int dim = 1; dim <= 2; ++dim) {
    const Grid g = make_grid(dim, 12.0, 64);
    const ComplexField fhat = fourier_forward(oracle::gaussian(g));
    const ComplexField exact = sample_spectrum(g, [&](const double* xi) {
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) r2 += xi[a] * xi[a];
      return cplx{std::pow(2.0 * pi, dim / 2.0) * std::exp(-r2 / 2.0), 0.0};
    });
    EXPECT_LT(oracle::max_abs_diff(fhat, exact), 1e-12) << "dim " << dim;
  }
}

TEST(Fourier, RoundTripAndParseval) {
  const Grid g = make_grid({2.0, 5.0}, {32, 20});
  const ComplexField f = oracle::random_field(g, 3);
  const ComplexField fhat = fourier_forward(f);
  EXPECT_LT(oracle::max_abs_diff(fourier_inverse(fhat), f), 1e-12);
  EXPECT_NEAR(l2_norm_from_spectrum(fhat), l2_norm(f), 1e-11 * l2_norm(f));
}

TEST(Norms, GaussianLp) {
  const Grid g = make_grid(1, 16.0, 512);
  const ComplexField f = oracle::gaussian(g);
  for (double p : {1.0, 2.0, 3.0, 4.5}) {
    const double exact = std::pow(std::sqrt(2.0 * pi / p), 1.0 / p);
    EXPECT_NEAR(lp_norm(f, p), exact, 1e-12) << "p = " << p;
  }
  EXPECT_DOUBLE_EQ(lp_norm(f, kInf), 1.0);
  EXPECT_DOUBLE_EQ(l2_norm(f), lp_norm(f, 2.0));
}

TEST(Norms, InnerProductIsSesquilinear) {
  const Grid g = make_grid(1, 3.0, 16);
  const ComplexField f = oracle::random_field(g, 1);
  const ComplexField h = oracle::random_field(g, 2);
  const cplx c{0.3, -1.2};
  EXPECT_LT(std::abs(inner_product(c * f, h) - c * inner_product(f, h)), 1e-12);
  EXPECT_NEAR(inner_product(f, f).real(), std::pow(l2_norm(f), 2), 1e-10);
}

TEST(Multipliers, DerivativesOfGaussian) {
  const Grid g = make_grid(1, 14.0, 256);
  const ComplexField f = oracle::gaussian(g);
  const ComplexField d = partial_derivative(f, 0);
  const ComplexField d_exact = sample(g, [](const double* x) { return cplx{-x[0] * std::exp(-x[0] * x[0] / 2), 0.0}; });
  EXPECT_LT(oracle::max_abs_diff(d, d_exact), 1e-11);
  const ComplexField lap = fractional_derivative(f, 0, 2.0);
  const ComplexField lap_exact =
      sample(g, [](const double* x) { return cplx{(1.0 - x[0] * x[0]) * std::exp(-x[0] * x[0] / 2), 0.0}; });
  EXPECT_LT(oracle::max_abs_diff(lap, lap_exact), 1e-11);
}

TEST(Multipliers, IdentityMultiplier) {
  const Grid g = make_grid({2.0, 2.0}, {16, 16});
  const ComplexField f = oracle::random_field(g, 4);
  const ComplexField out = apply_multiplier(f, [](const double*) { return cplx{1.0, 0.0}; });
  EXPECT_LT(oracle::max_abs_diff(out, f), 1e-12);
}

namespace {

SpaceTimeField random_spacetime(const Grid& g, std::size_t count, std::uint64_t seed) {
  SpaceTimeField u = make_spacetime(g, 0.0, 0.25, count);
  for (std::size_t j = 0; j < count; ++j) u.slices[j] = oracle::random_field(g, seed + j);
  return u;
}

// L^{po}_{x_axis} L^{pi}_{rest,t} by direct loops over slices 0 .. J-1.
double brute_axis_outer(const SpaceTimeField& u, int axis, double po, double pin) {
  const Grid& g = u.grid;
  const int other = 1 - axis;
  double outer = 0.0;
  for (int i = 0; i < g.samples[axis]; ++i) {
    double inner = 0.0;
    for (std::size_t t = 0; t + 1 < u.num_times(); ++t) {
      for (int j = 0; j < g.samples[other]; ++j) {
        const int i0 = axis == 0 ? i : j, i1 = axis == 0 ? j : i;
        const double a = std::abs(u.slices[t][static_cast<std::size_t>(i0 * g.samples[1] + i1)]);
        inner = std::isinf(pin) ? std::max(inner, a) : inner + std::pow(a, pin) * g.dx(other) * u.dt;
      }
    }
    if (!std::isinf(pin)) inner = std::pow(inner, 1.0 / pin);
    outer = std::isinf(po) ? std::max(outer, inner) : outer + std::pow(inner, po) * g.dx(axis);
  }
  return std::isinf(po) ? outer : std::pow(outer, 1.0 / po);
}

}  // namespace

TEST(MixedNorm, AxisOuterMatchesBruteForce) {
  const Grid g = make_grid({2.0, 3.0}, {16, 20});
  const SpaceTimeField u = random_spacetime(g, 5, 10);
  for (int axis = 0; axis < 2; ++axis) {
    for (auto [po, pin] : {std::pair{2.0, 2.0}, {4.0, kInf}, {kInf, 2.0}, {1.0, 3.0}}) {
      const double got = mixed_norm(u, MixedNorm::axis_outer(axis, po, pin));
      const double want = brute_axis_outer(u, axis, po, pin);
      EXPECT_NEAR(got, want, 1e-12 * want) << axis << ' ' << po << ' ' << pin;
      EXPECT_DOUBLE_EQ(anisotropic_norm(u, axis, po, pin), got);
    }
  }
}

TEST(MixedNorm, TimeOuterAndJoint) {
  const Grid g = make_grid({2.0, 3.0}, {16, 16});
  const SpaceTimeField u = random_spacetime(g, 6, 20);
  double tq = 0.0, tmax = 0.0, joint = 0.0;
  for (std::size_t t = 0; t + 1 < u.num_times(); ++t) {
    const double n = lp_norm(u.slices[t], 3.0);
    tq += std::pow(n, 4.0) * u.dt;
    tmax = std::max(tmax, n);
    for (const auto& v : u.slices[t].v) joint += std::pow(std::abs(v), 2.5) * g.cell_volume() * u.dt;
  }
  EXPECT_NEAR(mixed_norm(u, MixedNorm::time_outer(4.0, 3.0)), std::pow(tq, 0.25), 1e-12);
  EXPECT_NEAR(mixed_norm(u, MixedNorm::time_outer(kInf, 3.0)), tmax, 1e-12);
  EXPECT_NEAR(mixed_norm(u, MixedNorm::joint(2.5)), std::pow(joint, 1.0 / 2.5), 1e-11);
}

TEST(MixedNorm, AccumulatorGivesExpandingWindows) {
  const Grid g = make_grid({2.0, 3.0}, {16, 16});
  const SpaceTimeField u = random_spacetime(g, 6, 30);
  const MixedNorm spec = MixedNorm::axis_outer(0, 3.0, 2.0);
  MixedNormAccumulator acc(g, spec, u.dt);
  EXPECT_EQ(acc.value(), 0.0);
  for (std::size_t j = 1; j < u.num_times(); ++j) {
    acc.push(u.slices[j - 1]);
    SpaceTimeField prefix = u;
    prefix.slices.resize(j + 1);
    EXPECT_NEAR(acc.value(), mixed_norm(prefix, spec), 1e-13 * acc.value());
  }
}

TEST(MixedNorm, RejectsSingleSlice) {
  const Grid g = make_grid(1, 2.0, 16);
  const SpaceTimeField u = make_spacetime(g, 0.0, 0.1, 1);
  EXPECT_THROW(mixed_norm(u, MixedNorm::joint(2.0)), ValidationError);
}

TEST(Resize, BandLimitedInterpolation) {
  const Grid coarse = make_grid(1, 12.0, 64);
  const Grid fine = refined_grid(coarse, 2);
  EXPECT_EQ(fine.samples[0], 128);
  const ComplexField up = fourier_inverse(spectral_resize(fourier_forward(oracle::gaussian(coarse)), fine));
  EXPECT_LT(oracle::max_abs_diff(up, oracle::gaussian(fine)), 1e-12);
  const ComplexField fhat = fourier_forward(oracle::random_field(coarse, 2));
  const ComplexField back = spectral_resize(spectral_resize(fhat, fine), coarse);
  EXPECT_LT(oracle::max_abs_diff(back, fhat), 1e-15);
}

TEST(Fields, ArithmeticAndFiniteness) {
  const Grid g = make_grid(1, 2.0, 16);
  ComplexField a = oracle::random_field(g, 1);
  const ComplexField b = oracle::random_field(g, 2);
  EXPECT_LT(oracle::max_abs_diff((a + b) - b, a), 1e-15);
  EXPECT_NO_THROW(check_finite(a));
  a[3] = cplx{std::nan(""), 0.0};
  EXPECT_THROW(check_finite(a), ValidationError);
  EXPECT_THROW(ComplexField(g, std::vector<cplx>(3)), ValidationError);
}
