#include "modlab/solver.hpp"

#include <algorithm>
#include <cmath>

#include "modlab/errors.hpp"
#include "modlab/parallel.hpp"
#include "modlab/propagator.hpp"

namespace modlab {

namespace {

Grid padded_grid(const Grid& g, double padding) {
  Grid out = g;
  for (int a = 0; a < g.dim; ++a) {
    const int want = static_cast<int>(std::ceil(padding * g.samples[a] - 1e-9));
    out.samples[a] = want + (want % 2);
  }
  return out;
}

void check_blowup(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const auto& z : v) {
    const double a = std::abs(z);
    if (!std::isfinite(a)) throw NumericalError("blow-up detected: non-finite field value");
    m = std::max(m, a);
  }
  if (m > kBlowupThreshold) {
    throw NumericalError("blow-up detected: max |u| = " + std::to_string(m) + " exceeds " +
                         std::to_string(kBlowupThreshold));
  }
}

ComplexField on_grid(const ComplexField& fhat, const Grid& target) {
  return fourier_inverse(spectral_resize(fhat, target));
}

// Spectrum of a padded-grid product restricted to the field grid.
ComplexField back_spectrum(const ComplexField& prod, const Grid& g) {
  return spectral_resize(fourier_forward(prod), g);
}

ComplexField multiply_spectrum(const ComplexField& fhat, const std::function<cplx(const double*)>& m) {
  ComplexField out = fhat;
  const Grid& g = fhat.grid;
  const auto st = g.strides();
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    std::size_t rem = i;
    double xi[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
      xi[a] = g.xi(a, static_cast<int>(rem / st[a]));
      rem %= st[a];
    }
    out.v[i] *= m(xi);
  }
  return out;
}

double pow_int(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

ComplexField linear_half(const ComplexField& u, const SolverParams& p) {
  return propagate_spectral(u, 0.5 * p.dt, p.eps);
}

}  // namespace

NonlinearityKind parse_nonlinearity(const std::string& name) {
  if (name == "power-derivative") return NonlinearityKind::PowerDerivative;
  if (name == "power") return NonlinearityKind::Power;
  if (name == "schrodinger-map") return NonlinearityKind::SchrodingerMap;
  throw ValidationError("unknown nonlinearity kind '" + name + "'");
}

std::string nonlinearity_name(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::PowerDerivative: return "power-derivative";
    case NonlinearityKind::Power: return "power";
    case NonlinearityKind::SchrodingerMap: return "schrodinger-map";
  }
  return "?";
}

double SolverParams::required_padding() const {
  switch (kind) {
    case NonlinearityKind::PowerDerivative: return (2.0 * std::max(kappa, nu) + 2.0) / 2.0;
    case NonlinearityKind::Power: return (2.0 * nu + 2.0) / 2.0;
    case NonlinearityKind::SchrodingerMap: return 2.0;
  }
  return 2.0;
}

int SolverParams::steps() const { return static_cast<int>(std::llround(T / dt)); }

void SolverParams::validate(const Grid& g) const {
  require(eps.dim == g.dim, "signature length must match the grid dimension");
  require(dt > 0.0 && std::isfinite(dt), "time step must be positive");
  require(T > 0.0, "final time must be positive");
  require(std::abs(T / dt - std::round(T / dt)) < 1e-9 * std::max(1.0, T / dt), "T must be a multiple of dt");
  require(kappa >= 1 && nu >= 1, "kappa and nu must be at least 1");
  require(padding >= required_padding() - 1e-12,
          "dealias padding must be at least " + std::to_string(required_padding()));
}

ComplexField nonlinearity_eval(const ComplexField& u, const SolverParams& p) {
  const Grid& g = u.grid;
  require(p.eps.dim == g.dim, "signature length must match the grid dimension");
  require(p.padding >= p.required_padding() - 1e-12,
          "dealias padding must be at least " + std::to_string(p.required_padding()));
  check_blowup(u.v);
  const Grid pg = padded_grid(g, p.padding);
  const ComplexField uh = fourier_forward(u);
  const ComplexField up = on_grid(uh, pg);

  if (p.kind == NonlinearityKind::SchrodingerMap) {
    std::vector<ComplexField> d;
    for (int a = 0; a < g.dim; ++a) {
      d.push_back(on_grid(multiply_spectrum(uh, [a](const double* xi) { return cplx(0.0, xi[a]); }), pg));
    }
    ComplexField prod(pg);
    for (std::size_t i = 0; i < prod.v.size(); ++i) {
      const cplx z = up.v[i];
      cplx s{};
      for (int a = 0; a < g.dim; ++a) s += static_cast<double>(p.eps.eps[a]) * d[a].v[i] * d[a].v[i];
      prod.v[i] = 2.0 * std::conj(z) / (1.0 + std::norm(z)) * s;
    }
    return fourier_inverse(back_spectrum(prod, g));
  }

  ComplexField power(pg);
  if (p.mu != cplx{}) {
    for (std::size_t i = 0; i < power.v.size(); ++i) {
      power.v[i] = p.mu * pow_int(std::norm(up.v[i]), p.nu) * up.v[i];
    }
  }
  ComplexField total = back_spectrum(power, g);
  if (p.kind == NonlinearityKind::PowerDerivative) {
    const bool any = std::any_of(p.lambda.begin(), p.lambda.begin() + g.dim, [](cplx c) { return c != cplx{}; });
    if (any) {
      ComplexField gpow(pg);
      for (std::size_t i = 0; i < gpow.v.size(); ++i) gpow.v[i] = pow_int(std::norm(up.v[i]), p.kappa) * up.v[i];
      const ComplexField gh = back_spectrum(gpow, g);
      const ComplexField div = multiply_spectrum(gh, [&](const double* xi) {
        cplx s{};
        for (int a = 0; a < g.dim; ++a) s += p.lambda[a] * cplx(0.0, xi[a]);
        return s;
      });
      total += div;
    }
  }
  return fourier_inverse(total);
}

ComplexField strang_step(const ComplexField& u, const SolverParams& p) {
  const ComplexField a = linear_half(u, p);
  const cplx mi(0.0, -1.0);
  ComplexField mid = a;
  const ComplexField f0 = nonlinearity_eval(a, p);
  for (std::size_t i = 0; i < mid.v.size(); ++i) mid.v[i] += 0.5 * p.dt * mi * f0.v[i];
  const ComplexField f1 = nonlinearity_eval(mid, p);
  ComplexField b = a;
  for (std::size_t i = 0; i < b.v.size(); ++i) b.v[i] += p.dt * mi * f1.v[i];
  check_blowup(b.v);
  return linear_half(b, p);
}

Evolution evolve(const ComplexField& u0, const SolverParams& p, const Partition& P, const EvolveOptions& opts) {
  const Grid& g = u0.grid;
  p.validate(g);
  require(opts.snapshots >= 2, "evolve needs at least two snapshots");
  const int n = p.steps();
  int stride = std::max(1, (n + opts.snapshots - 1) / opts.snapshots);
  while (n % stride != 0) ++stride;
  const int count = n / stride;
  require(count >= 2, "evolve needs at least two stored slices; lower dt or raise T");

  Evolution ev;
  ev.u = make_spacetime(g, 0.0, stride * p.dt, static_cast<std::size_t>(count) + 1);
  ev.u.slices[0] = u0;
  ComplexField cur = u0;
  for (int s = 1; s <= n; ++s) {
    try {
      cur = strang_step(cur, p);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at t = " + std::to_string(s * p.dt));
    }
    if (s % stride == 0) ev.u.slices[static_cast<std::size_t>(s / stride)] = cur;
  }

  std::vector<SeminormId> ids = opts.trace_ids;
  if (ids.empty()) {
    if (g.dim == 1) {
      for (const char* t : {"sm1", "max1", "ant1", "str1", "gstr1"}) ids.push_back(SeminormId::parse(t));
    } else {
      const std::string m = std::to_string(2 * p.kappa);
      for (const char* t : {"sm", "max", "str"}) ids.push_back(SeminormId::parse(std::string(t) + ":" + m));
    }
  }
  ev.trace = seminorm_trace(ev.u, ids, P);
  ev.growth.assign(ids.size(), 0.0);
  if (opts.compare_free) {
    const SpaceTimeField lin = free_evolution(u0, p.T, count, p.eps);
    ev.free_trace = seminorm_trace(lin, ids, P);
    for (std::size_t r = 0; r < ev.trace.values.size(); ++r) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const double f = ev.free_trace.values[r][i];
        if (f > 0.0) ev.growth[i] = std::max(ev.growth[i], ev.trace.values[r][i] / f);
      }
    }
  }
  return ev;
}

std::vector<SeminormId> contraction_ids(int dim, int kappa) {
  std::vector<SeminormId> ids;
  if (dim == 1) {
    for (const char* t : {"sm1", "max1", "ant1", "str1", "gstr1"}) ids.push_back(SeminormId::parse(t));
  } else if (dim == 2) {
    for (const char* t : {"sm2", "max2d", "ant", "str2", "gstr"}) ids.push_back(SeminormId::parse(t));
  } else {
    const std::string m = std::to_string(2 * kappa);
    for (const char* t : {"sm", "max", "str"}) ids.push_back(SeminormId::parse(std::string(t) + ":" + m));
  }
  return ids;
}

double contraction_metric(const SpaceTimeField& u, const std::vector<SeminormId>& ids, const Partition& P) {
  double total = composite_seminorm(u, ids, P);
  for (int a = 0; a < u.grid.dim; ++a) {
    SpaceTimeField d = u;
    parallel_for(d.slices.size(), [&](std::size_t j) { d.slices[j] = partial_derivative(u.slices[j], a); });
    total += composite_seminorm(d, ids, P);
  }
  return total;
}

SpaceTimeField first_iterate_term(const ComplexField& u0, const SolverParams& p, double window, int slices) {
  const SpaceTimeField lin = free_evolution(u0, window, slices, p.eps);
  SpaceTimeField F = lin;
  for (std::size_t j = 0; j < F.slices.size(); ++j) F.slices[j] = nonlinearity_eval(lin.slices[j], p);
  return duhamel(F, p.eps);
}

PicardTrace picard_iterate(const ComplexField& u0, const SolverParams& p, int n_iter, double window, int slices,
                           const Partition& P) {
  require(n_iter >= 3, "Picard iteration needs at least three iterates");
  require(window > 0.0, "Picard window must be positive");
  require(slices >= 2, "Picard iteration needs at least three time slices");
  require(p.eps.dim == u0.grid.dim, "signature length must match the grid dimension");
  const std::vector<SeminormId> ids = contraction_ids(u0.grid.dim, p.kappa);
  const SpaceTimeField lin = free_evolution(u0, window, slices, p.eps);
  SpaceTimeField cur = lin;
  PicardTrace tr;
  int high = 0;
  const cplx mi(0.0, -1.0);
  for (int m = 1; m <= n_iter; ++m) {
    SpaceTimeField next;
    try {
      SpaceTimeField F = cur;
      for (std::size_t j = 0; j < F.slices.size(); ++j) F.slices[j] = nonlinearity_eval(cur.slices[j], p);
      next = duhamel(F, p.eps);
    } catch (const NumericalError&) {
      tr.diverged = true;
      break;
    }
    SpaceTimeField diff = next;
    for (std::size_t j = 0; j < next.slices.size(); ++j) {
      for (std::size_t i = 0; i < next.slices[j].v.size(); ++i) {
        next.slices[j].v[i] = lin.slices[j].v[i] + mi * next.slices[j].v[i];
        diff.slices[j].v[i] = next.slices[j].v[i] - cur.slices[j].v[i];
      }
    }
    const double d = contraction_metric(diff, ids, P);
    tr.iterate.push_back(m);
    tr.distance.push_back(d);
    if (tr.distance.size() >= 2) {
      const double prev = tr.distance[tr.distance.size() - 2];
      const double r = prev > 0.0 ? d / prev : 0.0;
      tr.ratio.push_back(r);
      high = r > 2.0 ? high + 1 : 0;
      if (high >= 2) {
        tr.diverged = true;
        break;
      }
    }
    cur = std::move(next);
    if (d == 0.0) {
      for (int r = m + 1; r <= n_iter; ++r) {
        tr.iterate.push_back(r);
        tr.distance.push_back(0.0);
        tr.ratio.push_back(0.0);
      }
      break;
    }
  }
  return tr;
}

}  // namespace modlab
