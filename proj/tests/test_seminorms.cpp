#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "modlab/seminorms.hpp"
#include "oracles.hpp"

using namespace modlab;

namespace {

const Partition& part() {
  static const Partition P = build_partition();
  return P;
}

SpaceTimeField random_spacetime(const Grid& g, std::size_t count, std::uint64_t seed) {
  SpaceTimeField u = make_spacetime(g, 0.0, 0.1, count);
  for (std::size_t j = 0; j < count; ++j) u.slices[j] = oracle::random_field(g, seed + j);
  return u;
}

SpaceTimeField boxed(const SpaceTimeField& u, const LatticePoint& k) {
  SpaceTimeField b = u;
  for (auto& s : b.slices) s = box_op(k, s, part());
  return b;
}

double jk(const LatticePoint& k, int dim) { return japanese(k, dim); }

// Straight-line evaluation of each definition: loop over k, box, accumulate.
double straight_line(const SpaceTimeField& u, const std::string& id) {
  const int dim = u.grid.dim;
  double total = 0.0;
  for (const LatticePoint& k : lattice(u.grid)) {
    const SpaceTimeField b = boxed(u, k);
    auto an = [&](int axis, double p, double pbar) { return mixed_norm(b, MixedNorm::axis_outer(axis, p, pbar)); };
    auto cap = [&](double joint) {
      return std::max(mixed_norm(b, MixedNorm::time_outer(kInf, 2.0)), mixed_norm(b, MixedNorm::joint(joint)));
    };
    auto smooth = [&](double power) {
      double s = 0.0;
      for (int i = 0; i < dim; ++i) {
        int other = 0;
        for (int j = 0; j < dim; ++j)
          if (j != i) other = std::max(other, std::abs(k[j]));
        if (std::abs(k[i]) >= std::max(20, other))
          s += std::pow(std::sqrt(1.0 + double(k[i]) * k[i]), power) * an(i, kInf, 2.0);
      }
      return s;
    };
    if (id == "sm2") total += smooth(1.5);
    if (id == "max2d") total += an(0, 2.0, kInf) + an(1, 2.0, kInf);
    if (id == "ant") total += an(0, 2.0, 4.0) + an(1, 2.0, 4.0);
    if (id == "str2") total += jk(k, 2) * cap(4.0);
    if (id == "gstr") total += mixed_norm(b, MixedNorm::joint(3.0));
    if (id == "sm1") total += smooth(4.0 / 3.0);
    if (id == "max1") total += an(0, 3.0, kInf);
    if (id == "ant1") total += an(0, 3.0, 6.0);
    if (id == "str1") total += std::pow(jk(k, 1), 5.0 / 6.0) * cap(6.0);
    if (id == "gstr1") total += mixed_norm(b, MixedNorm::joint(4.0));
    if (id == "sm:3") total += smooth(0.5 + 1.0 / 3.0);
    if (id == "max:3") total += an(0, 3.0, kInf) + an(1, 3.0, kInf);
    if (id == "str:3") total += std::pow(jk(k, dim), 1.0 / 3.0) * cap(5.0);
  }
  return total;
}

}  // namespace

TEST(SeminormId, ParseAndName) {
  EXPECT_EQ(SeminormId::parse("sm").tag, SeminormId::Tag::Sm);
  EXPECT_EQ(SeminormId::parse("sm:4").m, 4);
  EXPECT_EQ(SeminormId::parse("gstr1").tag, SeminormId::Tag::Gstr1);
  EXPECT_EQ(SeminormId::parse("str:3").name(), "str:3");
  EXPECT_EQ(SeminormId::parse("ant").name(), "ant");
  EXPECT_EQ(SeminormId::parse("max1").required_dim(), 1);
  EXPECT_EQ(SeminormId::parse("str2").required_dim(), 2);
  EXPECT_EQ(SeminormId::parse("max").required_dim(), 0);
  EXPECT_THROW(SeminormId::parse("bogus"), ValidationError);
  EXPECT_THROW(SeminormId::parse("sm:x"), ValidationError);
}

TEST(Composite, DimensionMismatchIsRejected) {
  const SpaceTimeField u = random_spacetime(make_grid(1, 4.0, 16), 3, 1);
  EXPECT_THROW(composite_seminorm(u, SeminormId::parse("ant"), part()), ValidationError);
  EXPECT_THROW(composite_seminorm(u, SeminormId::parse("sm"), part()), ValidationError);
  const SpaceTimeField v = random_spacetime(make_grid(2, 4.0, 16), 3, 1);
  EXPECT_THROW(composite_seminorm(v, SeminormId::parse("gstr1"), part()), ValidationError);
  EXPECT_THROW(composite_seminorm(v, SeminormId::parse("sm:1"), part()), ValidationError);
}

TEST(Composite, SingleOccupiedBox) {
  const Grid g = make_grid({2.0 * oracle::pi, 2.0 * oracle::pi}, {128, 32});
  SpaceTimeField u = make_spacetime(g, 0.0, 0.25, 5);
  for (auto& s : u.slices) s = sample(g, [](const double* x) { return std::polar(1.0, 25.0 * x[0]); });
  const double inner = std::sqrt(2.0 * g.half_extent[1] * 4 * 0.25);
  const double want = std::sqrt(1.0 + 625.0) * inner;
  EXPECT_NEAR(composite_seminorm(u, SeminormId::parse("sm"), part()), want, 1e-12 * want);
}

TEST(Composite, MatchesStraightLineOracle2D) {
  const Grid g = make_grid({oracle::pi, oracle::pi}, {48, 48});
  const SpaceTimeField u = random_spacetime(g, 4, 40);
  for (const std::string id : {"sm2", "max2d", "ant", "str2", "gstr", "sm:3", "max:3", "str:3"}) {
    const double want = straight_line(u, id);
    EXPECT_NEAR(composite_seminorm(u, SeminormId::parse(id), part()), want, 1e-12 * want) << id;
  }
}

TEST(Composite, MatchesStraightLineOracle1D) {
  const Grid g = make_grid(1, oracle::pi, 64);
  const SpaceTimeField u = random_spacetime(g, 5, 50);
  for (const std::string id : {"sm1", "max1", "ant1", "str1", "gstr1"}) {
    const double want = straight_line(u, id);
    EXPECT_NEAR(composite_seminorm(u, SeminormId::parse(id), part()), want, 1e-12 * want) << id;
  }
}

TEST(Composite, IntersectionRules) {
  const Grid g = make_grid({oracle::pi, oracle::pi}, {32, 32});
  const SpaceTimeField u = random_spacetime(g, 3, 60);
  const std::vector<SeminormId> ids{SeminormId::parse("max2d"), SeminormId::parse("ant"), SeminormId::parse("gstr")};
  double mx = 0.0, sum = 0.0;
  for (const auto& id : ids) {
    const double v = composite_seminorm(u, id, part());
    mx = std::max(mx, v);
    sum += v;
  }
  EXPECT_NEAR(composite_seminorm(u, ids, part(), CapRule::Max), mx, 1e-12 * mx);
  EXPECT_NEAR(composite_seminorm(u, ids, part(), CapRule::Sum), sum, 1e-12 * sum);
}

TEST(Properties, ZeroHomogeneityTriangle) {
  const Grid g = make_grid({oracle::pi, oracle::pi}, {32, 32});
  const SpaceTimeField u = random_spacetime(g, 3, 70);
  const SpaceTimeField v = random_spacetime(g, 3, 80);
  SpaceTimeField w = u, scaled = u, zero = make_spacetime(g, 0.0, 0.1, 3);
  for (std::size_t j = 0; j < u.num_times(); ++j) {
    w.slices[j] = u.slices[j] + v.slices[j];
    scaled.slices[j] = cplx{-2.0, 1.5} * u.slices[j];
  }
  for (const std::string id : {"max2d", "ant", "str2", "gstr"}) {
    const SeminormId s = SeminormId::parse(id);
    EXPECT_EQ(composite_seminorm(zero, s, part()), 0.0) << id;
    const double nu = composite_seminorm(u, s, part());
    EXPECT_NEAR(composite_seminorm(scaled, s, part()), 2.5 * nu, 1e-12 * nu) << id;
    EXPECT_LE(composite_seminorm(w, s, part()), nu + composite_seminorm(v, s, part()) + 1e-10) << id;
  }
}

TEST(Properties, SmoothingNormIgnoresLowBand) {
  const Grid g = make_grid({2.0 * oracle::pi, 2.0 * oracle::pi}, {128, 32});
  SpaceTimeField u = make_spacetime(g, 0.0, 0.1, 3);
  for (auto& s : u.slices)
    s = sample(g, [](const double* x) { return std::polar(1.0, 10.0 * x[0]) + std::polar(0.5, -19.0 * x[0] + 3.0 * x[1]); });
  const double scale = composite_seminorm(u, SeminormId::parse("max"), part());
  EXPECT_GT(scale, 1.0);
  EXPECT_LT(composite_seminorm(u, SeminormId::parse("sm"), part()), 1e-12 * scale);
  EXPECT_LT(composite_seminorm(u, SeminormId::parse("sm2"), part()), 1e-12 * scale);
}

TEST(Trace, ExpandingWindows) {
  const Grid g = make_grid({oracle::pi, oracle::pi}, {32, 32});
  const SpaceTimeField u = random_spacetime(g, 6, 90);
  const std::vector<SeminormId> ids{SeminormId::parse("max2d"), SeminormId::parse("str2")};
  const SeminormTrace tr = seminorm_trace(u, ids, part());
  ASSERT_EQ(tr.values.size(), 5u);
  EXPECT_EQ(tr.names, (std::vector<std::string>{"max2d", "str2"}));
  for (std::size_t r = 0; r < tr.values.size(); ++r) {
    EXPECT_DOUBLE_EQ(tr.window_end[r], u.time(r + 1));
    SpaceTimeField prefix = u;
    prefix.slices.resize(r + 2);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      EXPECT_NEAR(tr.values[r][i], composite_seminorm(prefix, ids[i], part()), 1e-12 * tr.values[r][i]);
      if (r > 0) EXPECT_GE(tr.values[r][i], tr.values[r - 1][i]);
    }
  }
  const SeminormTrace again = seminorm_trace(u, ids, part());
  EXPECT_EQ(again.values, tr.values);
  std::ostringstream os;
  write_trace_csv(os, tr);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t_end,max2d,str2");
}
