#include "modlab/freqdecomp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace modlab {

namespace {

constexpr double kSkipRelative = 1e-16;

double two_pi_power(int dim) { return std::pow(2.0 * std::numbers::pi, dim); }

// Calls fn(flat_index, weight) for every node in the support of sigma_k.
template <class Fn>
void for_each_window_node(const Grid& g, const LatticePoint& k, const Partition& P, Fn&& fn) {
  std::array<Partition::AxisWindow, 3> w;
  for (int a = 0; a < g.dim; ++a) {
    w[a] = P.axis_window(g, a, k[a]);
    if (w[a].weights.empty()) return;
  }
  const auto st = g.strides();
  const int n0 = static_cast<int>(w[0].weights.size());
  const int n1 = g.dim > 1 ? static_cast<int>(w[1].weights.size()) : 1;
  const int n2 = g.dim > 2 ? static_cast<int>(w[2].weights.size()) : 1;
  for (int i0 = 0; i0 < n0; ++i0) {
    const std::size_t b0 = static_cast<std::size_t>(w[0].begin + i0) * st[0];
    const double w0 = w[0].weights[i0];
    for (int i1 = 0; i1 < n1; ++i1) {
      const std::size_t b1 = g.dim > 1 ? b0 + static_cast<std::size_t>(w[1].begin + i1) * st[1] : b0;
      const double w1 = g.dim > 1 ? w0 * w[1].weights[i1] : w0;
      for (int i2 = 0; i2 < n2; ++i2) {
        const std::size_t idx = g.dim > 2 ? b1 + static_cast<std::size_t>(w[2].begin + i2) : b1;
        const double wt = g.dim > 2 ? w1 * w[2].weights[i2] : w1;
        fn(idx, wt);
      }
    }
  }
}

void require_resolvable(const Grid& g, const LatticePoint& k) {
  for (int a = 0; a < g.dim; ++a) {
    if (std::abs(k[a]) + 2 > g.max_abs_xi(a) + 1e-12) {
      throw ValidationError("lattice point outside the grid's resolvable frequency range");
    }
  }
}

}  // namespace

double bump_psi(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

double Partition::eta(double xi) const {
  if (std::abs(xi) >= 1.0) return 0.0;
  const double base = std::floor(xi);
  double denom = 0.0;
  for (int j = -1; j <= 2; ++j) denom += bump_psi(xi - (base + j));
  return bump_psi(xi) / denom;
}

double Partition::sigma(const LatticePoint& k, const double* xi, int dim) const {
  double s = 1.0;
  for (int a = 0; a < dim; ++a) s *= eta(xi[a] - k[a]);
  return s;
}

Partition::AxisWindow Partition::axis_window(const Grid& g, int axis, int k) const {
  AxisWindow w;
  const double d = g.dxi(axis);
  const int half = g.samples[axis] / 2;
  int lo = static_cast<int>(std::ceil((k - 1.0) / d)) + half;
  int hi = static_cast<int>(std::floor((k + 1.0) / d)) + half;
  lo = std::max(lo, 0);
  hi = std::min(hi, g.samples[axis] - 1);
  if (hi < lo) return w;
  w.begin = lo;
  w.weights.resize(static_cast<std::size_t>(hi - lo + 1));
  for (int m = lo; m <= hi; ++m) w.weights[m - lo] = eta(g.xi(axis, m) - k);
  return w;
}

Partition build_partition() { return Partition{}; }

std::vector<LatticePoint> lattice(const Grid& g) {
  std::array<int, 3> K{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    K[a] = g.k_max(a);
    require(K[a] >= 0, "grid band too narrow for the frequency-uniform decomposition");
  }
  std::vector<LatticePoint> out;
  for (int k0 = -K[0]; k0 <= K[0]; ++k0) {
    for (int k1 = -K[1]; k1 <= K[1]; ++k1) {
      for (int k2 = -K[2]; k2 <= K[2]; ++k2) out.push_back({k0, k1, k2});
    }
  }
  return out;
}

double japanese(const LatticePoint& k, int dim) {
  double s = 1.0;
  for (int a = 0; a < dim; ++a) s += static_cast<double>(k[a]) * k[a];
  return std::sqrt(s);
}

void box_spectrum_into(const LatticePoint& k, const ComplexField& fhat, const Partition& P,
                       std::vector<cplx>& out) {
  out.assign(fhat.size(), cplx{});
  for_each_window_node(fhat.grid, k, P, [&](std::size_t i, double w) { out[i] = w * fhat.v[i]; });
}

ComplexField box_spectrum(const LatticePoint& k, const ComplexField& fhat, const Partition& P) {
  require_resolvable(fhat.grid, k);
  ComplexField out(fhat.grid);
  box_spectrum_into(k, fhat, P, out.v);
  return out;
}

ComplexField box_op(const LatticePoint& k, const ComplexField& f, const Partition& P) {
  ComplexField out = box_spectrum(k, fourier_forward(f), P);
  fourier_inverse_inplace(out.grid, out.v);
  return out;
}

double box_sup_bound(const LatticePoint& k, const ComplexField& fhat, const Partition& P) {
  double s = 0.0;
  for_each_window_node(fhat.grid, k, P, [&](std::size_t i, double w) { s += w * std::abs(fhat.v[i]); });
  return s * fhat.grid.freq_cell_volume() / two_pi_power(fhat.grid.dim);
}

double partition_defect(const Grid& g, const Partition& P) {
  const auto pts = lattice(g);
  std::vector<double> total(g.size(), 0.0);
  for (const auto& k : pts) {
    for_each_window_node(g, k, P, [&](std::size_t i, double w) { total[i] += w; });
  }
  const auto st = g.strides();
  double worst = 0.0;
  for (std::size_t idx = 0; idx < total.size(); ++idx) {
    bool inside = true;
    std::size_t rem = idx;
    for (int a = 0; a < g.dim; ++a) {
      const int m = static_cast<int>(rem / st[a]);
      rem %= st[a];
      if (std::abs(g.xi(a, m)) > g.k_max(a) + 1e-12) inside = false;
    }
    if (inside) worst = std::max(worst, std::abs(total[idx] - 1.0));
  }
  return worst;
}

ComplexField reconstruct(const ComplexField& f, const Partition& P) {
  const ComplexField fh = fourier_forward(f);
  ComplexField acc(f.grid);
  for (const auto& k : lattice(f.grid)) {
    for_each_window_node(f.grid, k, P, [&](std::size_t i, double w) { acc.v[i] += w * fh.v[i]; });
  }
  fourier_inverse_inplace(acc.grid, acc.v);
  return acc;
}

std::vector<double> box_norms(const ComplexField& f, double p, const Partition& P) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  const Grid& g = f.grid;
  const ComplexField fh = fourier_forward(f);
  const auto pts = lattice(g);
  std::vector<double> out(pts.size(), 0.0);
  if (p == 2.0) {
    const double scale = g.freq_cell_volume() / two_pi_power(g.dim);
    for (std::size_t n = 0; n < pts.size(); ++n) {
      double s = 0.0;
      for_each_window_node(g, pts[n], P, [&](std::size_t i, double w) { s += w * w * std::norm(fh.v[i]); });
      out[n] = std::sqrt(s * scale);
    }
    return out;
  }
  std::vector<double> bound(pts.size());
  double max_bound = 0.0;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    bound[n] = box_sup_bound(pts[n], fh, P);
    max_bound = std::max(max_bound, bound[n]);
  }
  std::vector<cplx> work;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    if (bound[n] <= kSkipRelative * max_bound) continue;
    box_spectrum_into(pts[n], fh, P, work);
    fourier_inverse_inplace(g, work);
    out[n] = lp_norm(ComplexField(g, std::move(work)), p);
    work.clear();
  }
  return out;
}

double modulation_norm(const ComplexField& f, const NormSpec& spec, const Partition& P) {
  require(spec.q >= 1.0, "modulation norm needs q >= 1");
  const auto pts = lattice(f.grid);
  const auto norms = box_norms(f, spec.p, P);
  if (std::isinf(spec.q)) {
    double m = 0.0;
    for (std::size_t n = 0; n < pts.size(); ++n) {
      m = std::max(m, std::pow(japanese(pts[n], f.grid.dim), spec.s) * norms[n]);
    }
    return m;
  }
  double s = 0.0;
  for (std::size_t n = 0; n < pts.size(); ++n) {
    if (norms[n] == 0.0) continue;
    s += std::pow(std::pow(japanese(pts[n], f.grid.dim), spec.s) * norms[n], spec.q);
  }
  return std::pow(s, 1.0 / spec.q);
}

double stft_modulation_norm(const ComplexField& f, const NormSpec& spec, double window_width) {
  require(window_width > 0.0, "window width must be positive");
  const Grid& g = f.grid;
  const ComplexField fh = fourier_forward(f);
  const auto omegas = lattice(g);
  const double w2 = window_width * window_width;
  const double amp = std::pow(std::sqrt(2.0 * std::numbers::pi) * window_width, g.dim);
  const auto st = g.strides();
  std::vector<double> vals(omegas.size(), 0.0);
  std::vector<cplx> work(g.size());
  for (std::size_t n = 0; n < omegas.size(); ++n) {
    const auto& om = omegas[n];
    for (std::size_t idx = 0; idx < work.size(); ++idx) {
      std::size_t rem = idx;
      double r2 = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        const int m = static_cast<int>(rem / st[a]);
        rem %= st[a];
        const double d = g.xi(a, m) - om[a];
        r2 += d * d;
      }
      work[idx] = fh.v[idx] * (amp * std::exp(-0.5 * w2 * r2));
    }
    fourier_inverse_inplace(g, work);
    ComplexField slice(g, work);
    vals[n] = lp_norm(slice, spec.p);
  }
  if (std::isinf(spec.q)) {
    double m = 0.0;
    for (std::size_t n = 0; n < omegas.size(); ++n) {
      m = std::max(m, std::pow(japanese(omegas[n], g.dim), spec.s) * vals[n]);
    }
    return m;
  }
  double s = 0.0;
  for (std::size_t n = 0; n < omegas.size(); ++n) {
    s += std::pow(std::pow(japanese(omegas[n], g.dim), spec.s) * vals[n], spec.q);
  }
  return std::pow(s, 1.0 / spec.q);
}

bool conj_box_symmetry_check(const ComplexField& f, const LatticePoint& k, const Partition& P) {
  LatticePoint mk{-k[0], -k[1], -k[2]};
  const ComplexField lhs = box_op(k, conj(f), P);
  const ComplexField rhs = conj(box_op(mk, f, P));
  const double ref = l2_norm(f);
  return l2_norm(lhs - rhs) <= 1e-10 * std::max(ref, 1e-300);
}

double product_support_residual(const LatticePoint& k, const std::vector<LatticePoint>& factors,
                                const std::vector<ComplexField>& u, const Partition& P, int padding) {
  require(!u.empty() && u.size() == factors.size(), "need one lattice point per factor");
  const Grid& g = u.front().grid;
  for (const auto& f : u) require(f.grid == g, "factor grids differ");
  const int r = static_cast<int>(u.size());
  const int needed = (r + 2) / 2;
  if (padding == 0) padding = needed;
  if (2 * padding < r + 1) throw ValidationError("dealiasing padding below (r+1)/2 for this product");
  const Grid fine = refined_grid(g, padding);
  ComplexField prod(fine);
  for (auto& z : prod.v) z = 1.0;
  double scale = 1.0;
  for (int s = 0; s < r; ++s) {
    scale *= l2_norm(u[s]);
    ComplexField piece = spectral_resize(box_spectrum(factors[s], fourier_forward(u[s]), P), fine);
    fourier_inverse_inplace(fine, piece.v);
    for (std::size_t i = 0; i < prod.v.size(); ++i) prod.v[i] *= piece.v[i];
  }
  if (scale == 0.0) return 0.0;
  fourier_forward_inplace(fine, prod.v);
  const ComplexField localized = box_spectrum(k, prod, P);
  return l2_norm_from_spectrum(localized) / scale;
}

bool product_support_check(const LatticePoint& k, const std::vector<LatticePoint>& factors,
                           const std::vector<ComplexField>& u, const Partition& P, int padding) {
  require(!u.empty() && u.size() == factors.size(), "need one lattice point per factor");
  const int r = static_cast<int>(u.size());
  const int dim = u.front().grid.dim;
  bool separated = false;
  for (int a = 0; a < dim; ++a) {
    int sum = 0;
    for (const auto& kk : factors) sum += kk[a];
    if (std::abs(k[a] - sum) > r + 1) separated = true;
  }
  const double residual = product_support_residual(k, factors, u, P, padding);
  if (!separated) return true;
  return residual < 1e-10;
}

double direction_transfer_check(const ComplexField& f, const LatticePoint& k, const Partition& P) {
  require(f.grid.dim == 2, "direction transfer check needs dim = 2");
  require(std::abs(k[0]) >= std::max(std::abs(k[1]), 20), "direction transfer needs |k1| >= max(|k2|, 20)");
  require_resolvable(f.grid, k);
  const Grid& g = f.grid;
  const ComplexField fh = fourier_forward(f);
  const auto st = g.strides();
  double s1 = 0.0, s2 = 0.0;
  for_each_window_node(g, k, P, [&](std::size_t idx, double w) {
    const double xi1 = g.xi(0, static_cast<int>(idx / st[0]));
    const double xi2 = g.xi(1, static_cast<int>(idx % st[0]));
    const double a = w * w * std::norm(fh.v[idx]);
    s1 += xi1 * xi1 * a;
    s2 += xi2 * xi2 * a;
  });
  if (s1 == 0.0) return 0.0;
  return std::sqrt(s2 / s1);
}

}  // namespace modlab
