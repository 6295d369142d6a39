#include "modlab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modlab/errors.hpp"
#include "modlab/estimates.hpp"
#include "modlab/parallel.hpp"
#include "modlab/propagator.hpp"
#include "modlab/random.hpp"

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;

double bracket(double t) { return std::sqrt(1.0 + t * t); }

struct Vec3 {
  double x, y, z;
};

Vec3 sphere_at(double t, double x1, double x2) {
  const double b = bracket(t);
  const double phi = (x1 * x1 - x2 * x2) / (4.0 * b);
  return {-t / b, std::sin(phi) / b, std::cos(phi) / b};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Box = d_1^2 - d_2^2 of a pointwise function by centered differences.
template <class F>
auto box_stencil(const F& f, double x1, double x2, double h) {
  const auto c = f(x1, x2);
  const auto a = f(x1 + h, x2) + f(x1 - h, x2) - 2.0 * c;
  const auto b = f(x1, x2 + h) + f(x1, x2 - h) - 2.0 * c;
  return (a - b) / (h * h);
}

template <class Fn>
void for_patch(double radius, int points, const Fn& fn) {
  require(points >= 2, "patch needs at least two points per axis");
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      const double x1 = -radius + 2.0 * radius * i / (points - 1);
      const double x2 = -radius + 2.0 * radius * j / (points - 1);
      fn(x1, x2);
    }
  }
}

double smoothstep(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / y);
  const double b = std::exp(-1.0 / (1.0 - y));
  return a / (a + b);
}

ComplexField real_field(const Grid& g, const std::vector<double>& v) {
  ComplexField f(g);
  for (std::size_t i = 0; i < v.size(); ++i) f.v[i] = v[i];
  return f;
}

}  // namespace

double SphereField::unit_defect() const {
  double m = 0.0;
  for (std::size_t i = 0; i < s1.v.size(); ++i) {
    const double r = std::sqrt(std::norm(s1.v[i]) + std::norm(s2.v[i]) + std::norm(s3.v[i]));
    m = std::max(m, std::abs(r - 1.0));
  }
  return m;
}

SphereField blowup_sphere(double t, const Grid& g) {
  require(g.dim == 2, "the blow-up profile is defined for n = 2");
  SphereField s{ComplexField(g), ComplexField(g), ComplexField(g)};
  const auto st = g.strides();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x1 = g.x(0, static_cast<int>(i / st[0]));
    const double x2 = g.x(1, static_cast<int>(i % st[0]));
    const Vec3 v = sphere_at(t, x1, x2);
    s.s1.v[i] = v.x;
    s.s2.v[i] = v.y;
    s.s3.v[i] = v.z;
  }
  return s;
}

SchmapResidual schmap_residual(double t, double radius, int points, double h) {
  require(h > 0.0 && radius > 0.0, "stencil step and patch radius must be positive");
  SchmapResidual r;
  const double b = bracket(t);
  auto comp = [&](int c) {
    return [=](double x1, double x2) {
      const Vec3 v = sphere_at(t, x1, x2);
      return c == 0 ? v.x : (c == 1 ? v.y : v.z);
    };
  };
  for_patch(radius, points, [&](double x1, double x2) {
    const Vec3 s = sphere_at(t, x1, x2);
    const Vec3 sp = sphere_at(t + h, x1, x2);
    const Vec3 sm = sphere_at(t - h, x1, x2);
    const Vec3 st{(sp.x - sm.x) / (2 * h), (sp.y - sm.y) / (2 * h), (sp.z - sm.z) / (2 * h)};
    const Vec3 bx{box_stencil(comp(0), x1, x2, h), box_stencil(comp(1), x1, x2, h), box_stencil(comp(2), x1, x2, h)};
    const Vec3 rhs = cross(s, bx);
    const double res = std::sqrt((st.x - rhs.x) * (st.x - rhs.x) + (st.y - rhs.y) * (st.y - rhs.y) +
                                 (st.z - rhs.z) * (st.z - rhs.z));
    r.residual = std::max(r.residual, res);

    const double q = x1 * x1 - x2 * x2;
    const double phi = q / (4.0 * b);
    const double box2 = std::cos(phi) / (b * b) - q / (4.0 * b * b * b) * std::sin(phi);
    const double box3 = -std::sin(phi) / (b * b) - q / (4.0 * b * b * b) * std::cos(phi);
    r.box_s2_discrepancy = std::max(r.box_s2_discrepancy, std::abs(box2 - bx.y));
    r.box_s3_discrepancy = std::max(r.box_s3_discrepancy, std::abs(box3 - bx.z));
  });
  return r;
}

cplx blowup_value(double t, double T, double x1, double x2) {
  const double tau = t - T;
  const double b = bracket(tau);
  const double phi = (x1 * x1 - x2 * x2) / (4.0 * b);
  return cplx(-tau, std::sin(phi)) / (b + std::cos(phi));
}

BlowupReport blowup_u(double t, double T, const Grid& g, double threshold) {
  require(g.dim == 2, "the blow-up profile is defined for n = 2");
  BlowupReport rep;
  rep.u = ComplexField(g);
  rep.min_denominator = kInf;
  const double tau = t - T;
  const double b = bracket(tau);
  const auto st = g.strides();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x1 = g.x(0, static_cast<int>(i / st[0]));
    const double x2 = g.x(1, static_cast<int>(i % st[0]));
    const double phi = (x1 * x1 - x2 * x2) / (4.0 * b);
    const double den = b + std::cos(phi);
    rep.min_denominator = std::min(rep.min_denominator, den);
    if (den < threshold) rep.singular_nodes.push_back({x1, x2});
    if (tau == 0.0 && den < 1e-12) {
      rep.suppressed = true;
      continue;
    }
    rep.u.v[i] = cplx(-tau, std::sin(phi)) / den;
    rep.max_abs = std::max(rep.max_abs, std::abs(rep.u.v[i]));
  }
  return rep;
}

double blowup_curve_max(double t, double T, double half_width, int points) {
  require(points >= 1, "need at least one curve point");
  double m = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x2 = points == 1 ? 0.0 : -half_width + 2.0 * half_width * i / (points - 1);
    const double x1 = std::sqrt(4.0 * kPi + x2 * x2);
    m = std::max(m, std::abs(blowup_value(t, T, x1, x2)));
  }
  return m;
}

PdeResidual blowup_pde_residual(double t, double T, double radius, int points, double h) {
  require(h > 0.0 && radius > 0.0, "stencil step and patch radius must be positive");
  PdeResidual r;
  const cplx I(0.0, 1.0);
  auto u = [&](double x1, double x2) { return blowup_value(t, T, x1, x2); };
  for_patch(radius, points, [&](double x1, double x2) {
    const cplx c = u(x1, x2);
    const cplx ut = (blowup_value(t + h, T, x1, x2) - blowup_value(t - h, T, x1, x2)) / (2.0 * h);
    const cplx u1 = (u(x1 + h, x2) - u(x1 - h, x2)) / (2.0 * h);
    const cplx u2 = (u(x1, x2 + h) - u(x1, x2 - h)) / (2.0 * h);
    const cplx box = box_stencil(u, x1, x2, h);
    const cplx nl = 2.0 * std::conj(c) / (1.0 + std::norm(c)) * (u1 * u1 - u2 * u2);
    r.residual = std::max(r.residual, std::abs(I * ut + box - nl));
    r.printed_sign_residual = std::max(r.printed_sign_residual, std::abs(I * ut - box - nl));
  });
  return r;
}

SphereField stereo_to_sphere(const ComplexField& u) {
  const Grid& g = u.grid;
  std::vector<double> a(u.size()), b(u.size()), c(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double m = std::norm(u.v[i]);
    a[i] = 2.0 * u.v[i].real() / (1.0 + m);
    b[i] = 2.0 * u.v[i].imag() / (1.0 + m);
    c[i] = (1.0 - m) / (1.0 + m);
  }
  return {real_field(g, a), real_field(g, b), real_field(g, c)};
}

ComplexField sphere_to_stereo(const SphereField& s) {
  ComplexField u(s.s1.grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = 1.0 + s.s3.v[i].real();
    if (d <= 1e-6) throw ValidationError("sphere_to_stereo: field comes within 1e-6 of the south pole");
    u.v[i] = cplx(s.s1.v[i].real(), s.s2.v[i].real()) / d;
  }
  return u;
}

double stereo_norm_constant(const ComplexField& u, const NormSpec& spec, const Partition& P) {
  const double nu = modulation_norm(u, spec, P);
  require(nu > 0.0, "stereo_norm_constant needs a nonzero field");
  SphereField s = stereo_to_sphere(u);
  for (auto& z : s.s3.v) z -= 1.0;
  const double m = std::max({modulation_norm(s.s1, spec, P), modulation_norm(s.s2, spec, P),
                             modulation_norm(s.s3, spec, P)});
  return m / nu;
}

double cutoff_phi(double xi) { return smoothstep((1.0 - std::abs(xi)) / 0.5); }

ComplexField illposed_data(const IllposedSpec& spec, const Grid& g) {
  require(spec.N >= 4, "ill-posedness data needs N >= 4");
  require(spec.eps > 0.0 && spec.eps <= 0.125, "ill-posedness data needs 0 < eps <= 1/8");
  require(spec.kappa >= 1, "kappa must be at least 1");
  const double need = (2.0 * spec.kappa + 1.0) * spec.N + 2.0;
  if (g.max_abs_xi(0) < need) {
    throw ValidationError("grid band " + std::to_string(g.max_abs_xi(0)) + " does not cover (2 kappa + 1) N + 2 = " +
                          std::to_string(need));
  }
  for (int a = 0; a < g.dim; ++a) {
    require(g.dxi(a) <= spec.eps / 4.0, "frequency spacing must resolve the eps-bump (dxi <= eps/4)");
  }
  const double amp = std::pow(static_cast<double>(spec.N), -spec.s);
  const ComplexField spec_field = sample_spectrum(g, [&](const double* xi) {
    double v = cutoff_phi((xi[0] - spec.N) / spec.eps) + cutoff_phi((xi[0] + spec.N) / spec.eps);
    for (int a = 1; a < g.dim; ++a) v *= cutoff_phi(xi[a] / spec.eps);
    return cplx(amp * v, 0.0);
  });
  return fourier_inverse(spec_field);
}

InflationResult norm_inflation_sweep(const IllposedSpec& base, const std::vector<int>& N_list, double T, int J,
                                     const Grid& g) {
  require(g.dim == 1, "the inflation sweep runs in one dimension");
  require(N_list.size() >= 4, "the inflation sweep needs at least four N values");
  for (std::size_t i = 2; i < N_list.size(); ++i) {
    const double r0 = double(N_list[1]) / N_list[0];
    require(std::abs(double(N_list[i]) / N_list[i - 1] - r0) < 1e-9, "N values must form a geometric sequence");
  }
  require(T > 0.0 && J >= 2 && J % 2 == 0, "need T > 0 and an even slice count");
  const Signature eps = Signature::elliptic(1);
  const Partition P = build_partition();
  const std::vector<LatticePoint> pts = lattice(g);
  std::vector<Partition::AxisWindow> windows;
  for (const auto& k : pts) windows.push_back(P.axis_window(g, 0, k[0]));
  Grid pg = g;
  pg.samples[0] = 2 * g.samples[0];
  const double dt = T / J;
  const double scale = g.dxi(0) / (2.0 * kPi);

  InflationResult res;
  for (int N : N_list) {
    IllposedSpec spec = base;
    spec.N = N;
    const ComplexField u0h = fourier_forward(illposed_data(spec, g));
    std::vector<cplx> acc(g.size(), cplx{}), prev, cur;
    double best = 0.0;
    for (int j = 0; j <= J; ++j) {
      const double t = j * dt;
      std::vector<cplx> vh = u0h.v;
      propagate_spectrum_inplace(g, vh, t, eps);
      ComplexField vp = fourier_inverse(spectral_resize(ComplexField(g, std::move(vh)), pg));
      for (auto& z : vp.v) {
        double m = 1.0;
        for (int c = 0; c < spec.kappa; ++c) m *= std::norm(z);
        z *= m;
      }
      ComplexField gh = spectral_resize(fourier_forward(vp), g);
      cur = std::move(gh.v);
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] *= cplx(0.0, g.xi(0, static_cast<int>(i)));
      propagate_spectrum_inplace(g, cur, -t, eps);
      if (j > 0) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += 0.5 * dt * (prev[i] + cur[i]);
      }
      prev = cur;
      if (2 * j >= J) {
        std::vector<cplx> mh = acc;
        propagate_spectrum_inplace(g, mh, t, eps);
        double total = 0.0;
        for (std::size_t n = 0; n < pts.size(); ++n) {
          const auto& w = windows[n];
          double e = 0.0;
          for (std::size_t q = 0; q < w.weights.size(); ++q) {
            e += w.weights[q] * w.weights[q] * std::norm(mh[static_cast<std::size_t>(w.begin) + q]);
          }
          total += std::pow(japanese(pts[n], 1), spec.s) * std::sqrt(e * scale);
        }
        best = std::max(best, total);
      }
    }
    res.N.push_back(N);
    res.norm.push_back(best);
  }
  std::vector<double> x(res.N.begin(), res.N.end());
  res.slope = loglog_slope(x, res.norm);
  return res;
}

double weighted_sobolev_norm(const ComplexField& f, double s, double b) {
  const Grid& g = f.grid;
  ComplexField h = apply_multiplier(f, [&](const double* xi) {
    double r = 1.0;
    for (int a = 0; a < g.dim; ++a) r += xi[a] * xi[a];
    return cplx(std::pow(r, 0.5 * s), 0.0);
  });
  const auto st = g.strides();
  for (std::size_t i = 0; i < h.size(); ++i) {
    std::size_t rem = i;
    double r = 1.0;
    for (int a = 0; a < g.dim; ++a) {
      const double x = g.x(a, static_cast<int>(rem / st[a]));
      rem %= st[a];
      r += x * x;
    }
    h.v[i] *= std::pow(r, 0.5 * b);
  }
  return l2_norm(h);
}

std::vector<FamilyMember> embedding_family(int dim, int count, int max_k, std::uint64_t seed) {
  require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3");
  require(count >= 1 && max_k >= 0, "family needs a positive count and max_k >= 0");
  Rng rng(seed);
  std::vector<FamilyMember> out;
  for (int m = 0; m < count; ++m) {
    std::array<double, 3> c{};
    std::array<int, 3> k{};
    for (int a = 0; a < dim; ++a) {
      c[a] = rng.uniform(-3.0, 3.0);
      k[a] = rng.integer(-max_k, max_k);
    }
    const double w = rng.uniform(0.8, 2.0);
    const double rad = rng.uniform(2.0, 4.0);
    switch (m % 3) {
      case 0:
        out.push_back({"gaussian", [=](const double* x) {
                         double r2 = 0.0;
                         for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
                         return cplx(std::exp(-r2 / (2.0 * w * w)), 0.0);
                       }});
        break;
      case 1:
        out.push_back({"modulated-gaussian", [=](const double* x) {
                         double r2 = 0.0, ph = 0.0;
                         for (int a = 0; a < dim; ++a) {
                           r2 += (x[a] - c[a]) * (x[a] - c[a]);
                           ph += k[a] * x[a];
                         }
                         return std::exp(-r2 / (2.0 * w * w)) * cplx(std::cos(ph), std::sin(ph));
                       }});
        break;
      default:
        out.push_back({"bump", [=](const double* x) {
                         double r2 = 0.0;
                         for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
                         return cplx(bump_psi(std::sqrt(r2) / rad), 0.0);
                       }});
        break;
    }
  }
  return out;
}

EmbeddingResult embedding_sweep(const std::vector<FamilyMember>& family, const Grid& g, double s, double b,
                                const Partition& P) {
  require(b > g.dim / 2.0, "the embedding needs b > n/2");
  EmbeddingResult res;
  res.ratio.assign(family.size(), 0.0);
  parallel_for(family.size(), [&](std::size_t i) {
    const ComplexField f = sample(g, family[i].fn);
    const double den = weighted_sobolev_norm(f, s + b, b);
    res.ratio[i] = den > 0.0 ? modulation_norm(f, {s, 1.0, 1.0}, P) / den : 0.0;
  });
  for (double r : res.ratio) res.max_ratio = std::max(res.max_ratio, r);
  return res;
}

}  // namespace modlab
