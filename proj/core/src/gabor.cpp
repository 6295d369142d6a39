#include "modlab/gabor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "modlab/parallel.hpp"

namespace modlab {

namespace {

constexpr double kWindowCut = 9.0;

// Per-axis data for the folded transforms. Integer frequencies are resolved
// by folding samples modulo one 2 pi period of P nodes.
struct AxisPlan {
  int N = 0;
  int P = 0;
  double dx = 0.0;
  int K = 0;
  int L_rad = 0;
  // twiddle[(k + K) * P + r] = e^{-i k x_r}
  std::vector<cplx> twiddle;
  // Gaussian window for translation l: first node and weights.
  std::vector<int> begin;
  std::vector<std::vector<double>> weights;
};

AxisPlan make_axis_plan(const Grid& g, int axis, const FrameTruncation& tr) {
  AxisPlan a;
  a.N = g.samples[axis];
  a.dx = g.dx(axis);
  a.K = tr.K;
  a.L_rad = tr.L_rad;
  const double m = g.half_extent[axis] / std::numbers::pi;
  const long mi = std::lround(m);
  if (std::abs(m - static_cast<double>(mi)) > 1e-9 || mi <= 0 || a.N % mi != 0) {
    throw ValidationError("Gabor transforms need half extents that are integer multiples of pi dividing the sample count");
  }
  a.P = a.N / static_cast<int>(mi);
  require(2 * tr.K < a.P, "modulation truncation exceeds the grid band");
  a.twiddle.resize(static_cast<std::size_t>(2 * tr.K + 1) * a.P);
  for (int k = -tr.K; k <= tr.K; ++k) {
    for (int r = 0; r < a.P; ++r) {
      const double ph = -k * g.x(axis, r);
      a.twiddle[static_cast<std::size_t>(k + tr.K) * a.P + r] = cplx(std::cos(ph), std::sin(ph));
    }
  }
  for (int l = -tr.L_rad; l <= tr.L_rad; ++l) {
    const double lo = l - kWindowCut;
    const double hi = l + kWindowCut;
    int j0 = static_cast<int>(std::ceil((lo + g.half_extent[axis]) / a.dx));
    int j1 = static_cast<int>(std::floor((hi + g.half_extent[axis]) / a.dx));
    j0 = std::max(j0, 0);
    j1 = std::min(j1, a.N - 1);
    std::vector<double> w;
    for (int j = j0; j <= j1; ++j) {
      const double y = g.x(axis, j) - l;
      w.push_back(std::exp(-0.5 * y * y));
    }
    a.begin.push_back(j0);
    a.weights.push_back(std::move(w));
  }
  return a;
}

struct FramePlan {
  Grid grid;
  FrameTruncation trunc;
  std::array<AxisPlan, 3> axes;
  std::size_t fold_size = 1;
  std::array<std::size_t, 3> fold_strides{1, 1, 1};

  FramePlan(const Grid& g, const FrameTruncation& tr) : grid(g), trunc(tr) {
    require(tr.K >= 0 && tr.L_rad >= 0, "truncation radii must be nonnegative");
    for (int a = 0; a < g.dim; ++a) axes[a] = make_axis_plan(g, a, tr);
    for (int a = g.dim - 1; a >= 0; --a) {
      fold_strides[a] = fold_size;
      fold_size *= static_cast<std::size_t>(axes[a].P);
    }
  }

  LatticePoint l_point(std::size_t lidx) const {
    LatticePoint l{0, 0, 0};
    const int side = 2 * trunc.L_rad + 1;
    for (int a = grid.dim - 1; a >= 0; --a) {
      l[a] = static_cast<int>(lidx % side) - trunc.L_rad;
      lidx /= side;
    }
    return l;
  }
};

// Separable transform of a P^n array along every axis: out has (2K+1)^n
// entries; forward uses the twiddles, backward their conjugates.
std::vector<cplx> fold_dft(const FramePlan& fp, const std::vector<cplx>& folded) {
  const int n = fp.grid.dim;
  const int ks = 2 * fp.trunc.K + 1;
  std::vector<cplx> cur = folded;
  std::array<int, 3> shape{1, 1, 1};
  for (int a = 0; a < n; ++a) shape[a] = fp.axes[a].P;
  for (int a = 0; a < n; ++a) {
    const AxisPlan& ap = fp.axes[a];
    std::array<int, 3> out_shape = shape;
    out_shape[a] = ks;
    std::size_t outer = 1, inner = 1;
    for (int b = 0; b < a; ++b) outer *= static_cast<std::size_t>(shape[b]);
    for (int b = a + 1; b < n; ++b) inner *= static_cast<std::size_t>(shape[b]);
    std::vector<cplx> next(outer * ks * inner, cplx{});
    for (std::size_t o = 0; o < outer; ++o) {
      for (int k = 0; k < ks; ++k) {
        const cplx* tw = &ap.twiddle[static_cast<std::size_t>(k) * ap.P];
        cplx* dst = &next[(o * ks + k) * inner];
        for (int r = 0; r < ap.P; ++r) {
          const cplx* src = &cur[(o * ap.P + r) * inner];
          const cplx w = tw[r];
          for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
        }
      }
    }
    cur = std::move(next);
    shape = out_shape;
  }
  return cur;
}

std::vector<cplx> fold_idft(const FramePlan& fp, const std::vector<cplx>& coeffs) {
  const int n = fp.grid.dim;
  const int ks = 2 * fp.trunc.K + 1;
  std::vector<cplx> cur = coeffs;
  std::array<int, 3> shape{1, 1, 1};
  for (int a = 0; a < n; ++a) shape[a] = ks;
  for (int a = 0; a < n; ++a) {
    const AxisPlan& ap = fp.axes[a];
    std::size_t outer = 1, inner = 1;
    for (int b = 0; b < a; ++b) outer *= static_cast<std::size_t>(shape[b]);
    for (int b = a + 1; b < n; ++b) inner *= static_cast<std::size_t>(shape[b]);
    std::vector<cplx> next(outer * ap.P * inner, cplx{});
    for (std::size_t o = 0; o < outer; ++o) {
      for (int k = 0; k < ks; ++k) {
        const cplx* tw = &ap.twiddle[static_cast<std::size_t>(k) * ap.P];
        const cplx* src = &cur[(o * ks + k) * inner];
        for (int r = 0; r < ap.P; ++r) {
          cplx* dst = &next[(o * ap.P + r) * inner];
          const cplx w = std::conj(tw[r]);
          for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
        }
      }
    }
    cur = std::move(next);
    shape[a] = ap.P;
  }
  return cur;
}

// Visits every node of the window of translation l: fn(flat grid index,
// flat fold index, window weight).
template <class Fn>
void for_window(const FramePlan& fp, const LatticePoint& l, Fn&& fn) {
  const Grid& g = fp.grid;
  const auto st = g.strides();
  std::array<const AxisPlan*, 3> ap{};
  std::array<int, 3> b{0, 0, 0};
  std::array<const std::vector<double>*, 3> w{};
  static const std::vector<double> one{1.0};
  for (int a = 0; a < 3; ++a) {
    if (a < g.dim) {
      ap[a] = &fp.axes[a];
      const std::size_t li = static_cast<std::size_t>(l[a] + fp.trunc.L_rad);
      b[a] = fp.axes[a].begin[li];
      w[a] = &fp.axes[a].weights[li];
    } else {
      w[a] = &one;
    }
  }
  for (std::size_t i0 = 0; i0 < w[0]->size(); ++i0) {
    const int j0 = b[0] + static_cast<int>(i0);
    const std::size_t g0 = static_cast<std::size_t>(j0) * st[0];
    const std::size_t f0 = static_cast<std::size_t>(j0 % ap[0]->P) * fp.fold_strides[0];
    const double w0 = (*w[0])[i0];
    for (std::size_t i1 = 0; i1 < w[1]->size(); ++i1) {
      std::size_t g1 = g0, f1 = f0;
      double w1 = w0;
      if (g.dim > 1) {
        const int j1 = b[1] + static_cast<int>(i1);
        g1 += static_cast<std::size_t>(j1) * st[1];
        f1 += static_cast<std::size_t>(j1 % ap[1]->P) * fp.fold_strides[1];
        w1 *= (*w[1])[i1];
      }
      for (std::size_t i2 = 0; i2 < w[2]->size(); ++i2) {
        std::size_t g2 = g1, f2 = f1;
        double w2 = w1;
        if (g.dim > 2) {
          const int j2 = b[2] + static_cast<int>(i2);
          g2 += static_cast<std::size_t>(j2);
          f2 += static_cast<std::size_t>(j2 % ap[2]->P);
          w2 *= (*w[2])[i2];
        }
        fn(g2, f2, w2);
      }
    }
  }
}

FrameCoefficients analysis_with(const FramePlan& fp, const std::vector<cplx>& f) {
  FrameCoefficients c = FrameCoefficients::zeros(fp.grid.dim, fp.trunc);
  const std::size_t nl = c.l_count();
  const std::size_t nk = c.c.size() / nl;
  const double vol = fp.grid.cell_volume();
  parallel_for(nl, [&](std::size_t li) {
    const LatticePoint l = fp.l_point(li);
    std::vector<cplx> folded(fp.fold_size, cplx{});
    for_window(fp, l, [&](std::size_t gi, std::size_t fi, double w) { folded[fi] += w * f[gi]; });
    const std::vector<cplx> ck = fold_dft(fp, folded);
    for (std::size_t ki = 0; ki < nk; ++ki) c.c[ki * nl + li] = vol * ck[ki];
  });
  return c;
}

std::vector<cplx> synthesis_with(const FramePlan& fp, const FrameCoefficients& c) {
  const std::size_t nl = c.l_count();
  const std::size_t nk = c.c.size() / nl;
  std::vector<std::vector<cplx>> per_l(nl);
  parallel_for(nl, [&](std::size_t li) {
    std::vector<cplx> ck(nk);
    bool any = false;
    for (std::size_t ki = 0; ki < nk; ++ki) {
      ck[ki] = c.c[ki * nl + li];
      any = any || ck[ki] != cplx{};
    }
    if (any) per_l[li] = fold_idft(fp, ck);
  });
  std::vector<cplx> out(fp.grid.size(), cplx{});
  for (std::size_t li = 0; li < nl; ++li) {
    if (per_l[li].empty()) continue;
    const std::vector<cplx>& T = per_l[li];
    for_window(fp, fp.l_point(li), [&](std::size_t gi, std::size_t fi, double w) { out[gi] += w * T[fi]; });
  }
  return out;
}

double dot_re(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

double energy_outside_fraction(const ComplexField& f, const FrameTruncation& tr) {
  const Grid& g = f.grid;
  double total = 0.0, outside_x = 0.0;
  const auto st = g.strides();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = std::norm(f.v[i]);
    total += e;
    std::size_t rem = i;
    for (int a = 0; a < g.dim; ++a) {
      const int j = static_cast<int>(rem / st[a]);
      rem %= st[a];
      if (std::abs(g.x(a, j)) > tr.L_rad + 1.0) {
        outside_x += e;
        break;
      }
    }
  }
  if (total == 0.0) return 0.0;
  const ComplexField fh = fourier_forward(f);
  double ftotal = 0.0, outside_xi = 0.0;
  for (std::size_t i = 0; i < fh.size(); ++i) {
    const double e = std::norm(fh.v[i]);
    ftotal += e;
    std::size_t rem = i;
    for (int a = 0; a < g.dim; ++a) {
      const int m = static_cast<int>(rem / st[a]);
      rem %= st[a];
      if (std::abs(g.xi(a, m)) > tr.K + 1.0) {
        outside_xi += e;
        break;
      }
    }
  }
  return outside_x / total + (ftotal > 0.0 ? outside_xi / ftotal : 0.0);
}

}  // namespace

FrameTruncation default_truncation(const Grid& g) {
  int kmin = g.k_max(0);
  double lmin = g.half_extent[0];
  for (int a = 1; a < g.dim; ++a) {
    kmin = std::min(kmin, g.k_max(a));
    lmin = std::min(lmin, g.half_extent[a]);
  }
  FrameTruncation t{kmin - 2, static_cast<int>(std::floor(lmin)) - 6};
  require(t.K >= 0 && t.L_rad >= 0, "grid too small for a default Gabor truncation");
  return t;
}

FrameCoefficients FrameCoefficients::zeros(int dim, const FrameTruncation& trunc) {
  require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3");
  require(trunc.K >= 0 && trunc.L_rad >= 0, "truncation radii must be nonnegative");
  FrameCoefficients c;
  c.dim = dim;
  c.trunc = trunc;
  std::size_t nk = 1;
  for (int a = 0; a < dim; ++a) nk *= static_cast<std::size_t>(c.k_side());
  c.c.assign(nk * c.l_count(), cplx{});
  return c;
}

std::size_t FrameCoefficients::l_count() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(l_side());
  return n;
}

std::size_t FrameCoefficients::index(const LatticePoint& k, const LatticePoint& l) const {
  std::size_t ki = 0, li = 0;
  for (int a = 0; a < dim; ++a) {
    if (std::abs(k[a]) > trunc.K || std::abs(l[a]) > trunc.L_rad) {
      throw ValidationError("Gabor index outside the truncation");
    }
    ki = ki * k_side() + static_cast<std::size_t>(k[a] + trunc.K);
    li = li * l_side() + static_cast<std::size_t>(l[a] + trunc.L_rad);
  }
  return ki * l_count() + li;
}

LatticePoint FrameCoefficients::k_of(std::size_t flat) const {
  std::size_t ki = flat / l_count();
  LatticePoint k{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    k[a] = static_cast<int>(ki % k_side()) - trunc.K;
    ki /= k_side();
  }
  return k;
}

LatticePoint FrameCoefficients::l_of(std::size_t flat) const {
  std::size_t li = flat % l_count();
  LatticePoint l{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    l[a] = static_cast<int>(li % l_side()) - trunc.L_rad;
    li /= l_side();
  }
  return l;
}

ComplexField gauss_atom(const LatticePoint& k, const LatticePoint& l, const Grid& g) {
  for (int a = 0; a < g.dim; ++a) {
    if (std::abs(l[a]) > g.half_extent[a] - 6.0) throw ValidationError("Gabor atom too close to the boundary");
  }
  return sample(g, [&](const double* x) {
    double phase = 0.0, r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      phase += k[a] * x[a];
      r2 += (x[a] - l[a]) * (x[a] - l[a]);
    }
    return std::exp(-0.5 * r2) * cplx(std::cos(phase), std::sin(phase));
  });
}

FrameCoefficients analysis_coefficients(const ComplexField& f, const FrameTruncation& trunc) {
  const FramePlan fp(f.grid, trunc);
  return analysis_with(fp, f.v);
}

ComplexField synthesize(const FrameCoefficients& c, const Grid& g) {
  require(c.dim == g.dim, "coefficient dimension must match the grid");
  const FramePlan fp(g, c.trunc);
  return ComplexField(g, synthesis_with(fp, c));
}

ComplexField frame_operator_apply(const ComplexField& f, const FrameTruncation& trunc, bool* truncation_warning) {
  const FramePlan fp(f.grid, trunc);
  if (truncation_warning) *truncation_warning = energy_outside_fraction(f, trunc) > 1e-12;
  return ComplexField(f.grid, synthesis_with(fp, analysis_with(fp, f.v)));
}

FrameCoefficients analyze(const ComplexField& f, const FrameTruncation& trunc, const AnalyzeOptions& opts) {
  const FramePlan fp(f.grid, trunc);
  const std::size_t n = f.size();
  const double fnorm = std::sqrt(dot_re(f.v, f.v));
  if (fnorm == 0.0) return FrameCoefficients::zeros(f.grid.dim, trunc);

  std::vector<cplx> h(n, cplx{});
  std::vector<cplx> r = f.v;
  std::vector<cplx> p = r;
  double rr = dot_re(r, r);
  double rel = std::sqrt(rr) / fnorm;
  for (int it = 0; it < opts.max_iterations && rel >= opts.tolerance; ++it) {
    const std::vector<cplx> Sp = synthesis_with(fp, analysis_with(fp, p));
    const double pSp = dot_re(p, Sp);
    if (!(pSp > 0.0)) break;
    const double alpha = rr / pSp;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] += alpha * p[i];
      r[i] -= alpha * Sp[i];
    }
    const double rr_new = dot_re(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rel = std::sqrt(rr) / fnorm;
  }
  if (!(rel < opts.tolerance)) {
    std::ostringstream msg;
    msg << "frame inversion did not converge; relative residual " << rel;
    throw NumericalError(msg.str());
  }
  return analysis_with(fp, h);
}

std::vector<ComplexField> frame_test_packets(const Grid& g, const FrameTruncation& trunc) {
  const double step = std::sqrt(2.0 * std::numbers::pi);
  const double rx = std::max(trunc.L_rad - 2.0, step);
  const double rxi = std::max(trunc.K - 2.0, step);
  std::vector<double> xs, xis;
  const int nx = static_cast<int>(std::floor(rx / step));
  const int nxi = static_cast<int>(std::floor(rxi / step));
  for (int i = -nx; i <= nx; ++i) xs.push_back(step * i);
  for (int i = -nxi; i <= nxi; ++i) xis.push_back(step * i);

  const std::size_t per_axis = xs.size() * xis.size();
  std::size_t total = 1;
  for (int a = 0; a < g.dim; ++a) total *= per_axis;
  std::vector<ComplexField> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::array<double, 3> x0{}, xi0{};
    std::size_t rem = idx;
    for (int a = g.dim - 1; a >= 0; --a) {
      const std::size_t q = rem % per_axis;
      rem /= per_axis;
      x0[a] = xs[q / xis.size()];
      xi0[a] = xis[q % xis.size()];
    }
    out.push_back(sample(g, [&](const double* x) {
      double phase = 0.0, r2 = 0.0;
      for (int a = 0; a < g.dim; ++a) {
        phase += xi0[a] * x[a];
        r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
      }
      return std::exp(-0.5 * r2) * cplx(std::cos(phase), std::sin(phase));
    }));
  }
  return out;
}

FrameBounds frame_bounds(const Grid& g, const FrameTruncation& trunc) {
  const FramePlan fp(g, trunc);
  const std::vector<ComplexField> packets = frame_test_packets(g, trunc);
  const Eigen::Index m = static_cast<Eigen::Index>(packets.size());
  const Eigen::Index n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd P(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) P(i, j) = packets[j].v[i];
  }
  P *= std::sqrt(g.cell_volume());
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(P, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
  const Eigen::MatrixXcd Q = svd.matrixU().leftCols(rank);

  // Analysis coefficients of each basis vector; <S q_i, q_j> = sum c_i conj(c_j).
  const std::size_t ncoef = FrameCoefficients::zeros(g.dim, trunc).c.size();
  Eigen::MatrixXcd C(static_cast<Eigen::Index>(ncoef), rank);
  const double inv = 1.0 / std::sqrt(g.cell_volume());
  for (Eigen::Index j = 0; j < rank; ++j) {
    std::vector<cplx> q(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) q[i] = Q(i, j) * inv;
    const FrameCoefficients c = analysis_with(fp, q);
    for (std::size_t i = 0; i < ncoef; ++i) C(static_cast<Eigen::Index>(i), j) = c.c[i];
  }
  const Eigen::MatrixXcd M = C.adjoint() * C;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  FrameBounds b;
  b.A = es.eigenvalues()(0);
  b.B = es.eigenvalues()(rank - 1);
  b.subspace_dim = static_cast<int>(rank);
  if (!(b.A >= 1e-8 * b.B) || !(b.B > 0.0)) {
    std::ostringstream msg;
    msg << "frame lower bound indistinguishable from zero (A = " << b.A << ", B = " << b.B << ")";
    throw NumericalError(msg.str());
  }
  return b;
}

double coefficient_norm(const FrameCoefficients& c, const NormSpec& spec) {
  require(spec.p >= 1.0 && spec.q >= 1.0, "sequence norm exponents must be at least 1");
  const std::size_t nl = c.l_count();
  const std::size_t nk = c.c.size() / nl;
  double total = 0.0;
  for (std::size_t ki = 0; ki < nk; ++ki) {
    double inner = 0.0;
    for (std::size_t li = 0; li < nl; ++li) {
      const double a = std::abs(c.c[ki * nl + li]);
      inner = std::isinf(spec.p) ? std::max(inner, a) : inner + std::pow(a, spec.p);
    }
    if (!std::isinf(spec.p)) inner = std::pow(inner, 1.0 / spec.p);
    const double w = std::pow(japanese(c.k_of(ki * nl), c.dim), spec.s) * inner;
    total = std::isinf(spec.q) ? std::max(total, w) : total + std::pow(w, spec.q);
  }
  return std::isinf(spec.q) ? total : std::pow(total, 1.0 / spec.q);
}

void write_coefficients(std::ostream& os, const FrameCoefficients& c) {
  os << "# modlab-gabor dim " << c.dim << " K " << c.trunc.K << " L_rad " << c.trunc.L_rad << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < c.c.size(); ++i) {
    if (c.c[i] == cplx{}) continue;
    const LatticePoint k = c.k_of(i);
    const LatticePoint l = c.l_of(i);
    for (int a = 0; a < c.dim; ++a) os << k[a] << ' ';
    for (int a = 0; a < c.dim; ++a) os << l[a] << ' ';
    os << c.c[i].real() << ' ' << c.c[i].imag() << '\n';
  }
}

FrameCoefficients read_coefficients(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty coefficient stream");
  std::istringstream head(line);
  std::string hash, tag, kd, kk, kl;
  int dim = 0;
  FrameTruncation tr;
  head >> hash >> tag >> kd >> dim >> kk >> tr.K >> kl >> tr.L_rad;
  if (!head || hash != "#" || tag != "modlab-gabor" || kd != "dim" || kk != "K" || kl != "L_rad") {
    throw ValidationError("malformed coefficient header");
  }
  FrameCoefficients c = FrameCoefficients::zeros(dim, tr);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    LatticePoint k{0, 0, 0}, l{0, 0, 0};
    double re = 0.0, im = 0.0;
    for (int a = 0; a < dim; ++a) row >> k[a];
    for (int a = 0; a < dim; ++a) row >> l[a];
    row >> re >> im;
    if (!row) throw ValidationError("malformed coefficient line " + std::to_string(lineno));
    c.at(k, l) = cplx(re, im);
  }
  return c;
}

}  // namespace modlab
