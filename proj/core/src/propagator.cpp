#include "modlab/propagator.hpp"

#include <atomic>
#include <cmath>

namespace modlab {

namespace {

std::atomic<int> g_time_sign{1};

std::vector<cplx> axis_phase(const Grid& g, int axis, double t, int eps) {
  std::vector<cplx> out(static_cast<std::size_t>(g.samples[axis]));
  for (int m = 0; m < g.samples[axis]; ++m) {
    const double xi = g.xi(axis, m);
    const double ph = t * eps * xi * xi;
    out[m] = cplx(std::cos(ph), std::sin(ph));
  }
  return out;
}

// Applies prod_a factor_a(m_a) to a flat array.
void apply_separable(const Grid& g, const std::array<std::vector<cplx>, 3>& f, std::vector<cplx>& data) {
  const auto st = g.strides();
  const int n0 = g.samples[0];
  const int n1 = g.dim > 1 ? g.samples[1] : 1;
  const int n2 = g.dim > 2 ? g.samples[2] : 1;
  for (int i0 = 0; i0 < n0; ++i0) {
    for (int i1 = 0; i1 < n1; ++i1) {
      const cplx w01 = g.dim > 1 ? f[0][i0] * f[1][i1] : f[0][i0];
      const std::size_t base = static_cast<std::size_t>(i0) * st[0] + (g.dim > 1 ? static_cast<std::size_t>(i1) * st[1] : 0);
      for (int i2 = 0; i2 < n2; ++i2) {
        data[base + static_cast<std::size_t>(i2)] *= g.dim > 2 ? w01 * f[2][i2] : w01;
      }
    }
  }
}

void check_signature(const Grid& g, const Signature& eps) {
  require(eps.dim == g.dim, "signature length must match the grid dimension");
}

// One-dimensional factor of the evolved atom along an axis.
std::vector<cplx> atom_axis_factor(const Grid& g, int axis, int k, int l, double t, int eps) {
  const cplx c(1.0, -2.0 * eps * t);
  const cplx inv_sqrt_c = 1.0 / std::sqrt(c);
  const double center = l - 2.0 * t * eps * k;
  std::vector<cplx> out(static_cast<std::size_t>(g.samples[axis]));
  for (int j = 0; j < g.samples[axis]; ++j) {
    const double x = g.x(axis, j);
    const double y = x - center;
    const cplx gauss = std::exp(-(y * y) / (2.0 * c));
    out[j] = cplx(std::cos(k * x), std::sin(k * x)) * gauss * inv_sqrt_c;
  }
  return out;
}

}  // namespace

int time_sign() { return g_time_sign.load(); }

void set_time_sign(int sign) {
  require(sign == 1 || sign == -1, "time sign must be +1 or -1");
  g_time_sign.store(sign);
}

void propagate_spectrum_inplace(const Grid& g, std::vector<cplx>& fhat, double t, const Signature& eps) {
  check_signature(g, eps);
  if (t == 0.0) return;
  const double st = time_sign() * t;
  std::array<std::vector<cplx>, 3> f;
  for (int a = 0; a < g.dim; ++a) f[a] = axis_phase(g, a, st, eps.eps[a]);
  apply_separable(g, f, fhat);
}

ComplexField propagate_spectral(const ComplexField& f, double t, const Signature& eps) {
  ComplexField out = fourier_forward(f);
  propagate_spectrum_inplace(out.grid, out.v, t, eps);
  fourier_inverse_inplace(out.grid, out.v);
  return out;
}

ComplexField atom_evolution(const LatticePoint& k, const LatticePoint& l, double t, const Signature& eps,
                            const Grid& g) {
  check_signature(g, eps);
  const double ts = time_sign() * t;
  for (int a = 0; a < g.dim; ++a) {
    const double center = l[a] - 2.0 * ts * eps.eps[a] * k[a];
    if (std::abs(center) > g.half_extent[a] - 6.0) {
      throw ValidationError("transported atom leaves the interior of the box");
    }
  }
  std::array<std::vector<cplx>, 3> f;
  double kk = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    f[a] = atom_axis_factor(g, a, k[a], l[a], ts, eps.eps[a]);
    kk += eps.eps[a] * static_cast<double>(k[a]) * k[a];
  }
  const cplx global(std::cos(ts * kk), std::sin(ts * kk));
  for (auto& z : f[0]) z *= global;
  ComplexField out(g);
  for (auto& z : out.v) z = 1.0;
  apply_separable(g, f, out.v);
  return out;
}

ComplexField propagate_gabor(const FrameCoefficients& c, double t, const Signature& eps, const Grid& g) {
  require(c.dim == g.dim, "coefficient dimension must match the grid");
  ComplexField out(g);
  for (std::size_t n = 0; n < c.c.size(); ++n) {
    if (c.c[n] == cplx{}) continue;
    const ComplexField atom = atom_evolution(c.k_of(n), c.l_of(n), t, eps, g);
    const cplx w = c.c[n];
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += w * atom.v[i];
  }
  return out;
}

SpaceTimeField free_evolution(const ComplexField& u0, double T, int J, const Signature& eps) {
  require(J >= 1, "need at least one time step");
  SpaceTimeField u = make_spacetime(u0.grid, 0.0, T / J, static_cast<std::size_t>(J) + 1);
  const ComplexField u0h = fourier_forward(u0);
  for (int j = 0; j <= J; ++j) {
    std::vector<cplx> w = u0h.v;
    propagate_spectrum_inplace(u0.grid, w, u.time(j), eps);
    fourier_inverse_inplace(u0.grid, w);
    u.slices[j].v = std::move(w);
  }
  return u;
}

SpaceTimeField duhamel(const SpaceTimeField& F, const Signature& eps) {
  require(F.slices.size() >= 3, "Duhamel quadrature needs at least three time slices");
  const Grid& g = F.grid;
  SpaceTimeField out = make_spacetime(g, F.t0, F.dt, F.slices.size());
  std::vector<cplx> acc(g.size(), cplx{});
  std::vector<cplx> prev;
  for (std::size_t j = 0; j < F.slices.size(); ++j) {
    std::vector<cplx> cur = F.slices[j].v;
    fourier_forward_inplace(g, cur);
    propagate_spectrum_inplace(g, cur, -F.time(j), eps);
    if (j > 0) {
      const double h = 0.5 * F.dt;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += h * (prev[i] + cur[i]);
    }
    std::vector<cplx> slice = acc;
    propagate_spectrum_inplace(g, slice, F.time(j), eps);
    fourier_inverse_inplace(g, slice);
    out.slices[j].v = std::move(slice);
    prev = std::move(cur);
  }
  return out;
}

ComplexField duhamel_constant_profile(const ComplexField& h, double t, const Signature& eps) {
  check_signature(h.grid, eps);
  const double s = time_sign();
  return apply_multiplier(h, [&](const double* xi) {
    const double w = s * eps.quadratic(xi);
    const double tw = t * w;
    if (std::abs(tw) < 1e-8) return cplx(t, 0.5 * t * tw);
    return (cplx(std::cos(tw), std::sin(tw)) - 1.0) / cplx(0.0, w);
  });
}

}  // namespace modlab
