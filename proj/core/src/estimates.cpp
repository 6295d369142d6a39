#include "modlab/estimates.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "modlab/parallel.hpp"
#include "modlab/propagator.hpp"
#include "modlab/random.hpp"

namespace modlab {

namespace {

enum class Source { Free, Resonant, Constant };

// How the left-hand side and the data norm of a case are measured.
struct CaseRecipe {
  bool forcing = false;        // rows for the resonant and the constant forcing
  bool box_lhs = true;         // apply box_k to the measured field
  double derivative = 0.0;     // 0, 1/2 (|xi_1|^{1/2}) or 1 (d/dx_1)
  std::vector<MixedNorm> lhs;  // combined by max
  enum class Rhs { L2Data, L1Data, Modulation, ForcingMixed, UniformLp } rhs = Rhs::L2Data;
  MixedNorm forcing_norm;      // for Rhs::ForcingMixed
  NormSpec modulation;         // for Rhs::Modulation
  double weight = 0.0;         // exponent of <k_1>
  bool secondary = false;
  double secondary_weight = 0.0;
};

const std::vector<EstimateCase> kCases = {
    {"gabor-global", "a", "||S(t)u0||_{L^p_{x1} L^pbar}", "||u0||_{M^{1/p}_{1,1}}", false, 2},
    {"l1-anisotropic", "b", "max_{q=4,inf} ||box S(t)u0||_{L^2_{x1} L^q}", "<k>^{1/2} ||box u0||_1", false, 2},
    {"smooth-effect", "c", "||D^{1/2}_{x1} box S(t)u0||_{L^inf_{x1} L^2}", "||box u0||_2", false, 2},
    {"smooth-effect-duhamel", "c2", "||d_{x1} box A f||_{L^inf_{x1} L^2}", "||box f||_{L^1_{x1} L^2}", true, 2},
    {"strichartz", "d", "||box S(t)u0||_{L^inf_t L^2 cap L^{2+p}}", "||box u0||_2", false, 2},
    {"smooth-strichartz", "e1", "||box d_{x1} A f||_{L^inf_t L^2 cap L^{2+p}}", "<k1>^{1/2} ||box f||_{L^1_{x1} L^2}",
     true, 2},
    {"strichartz-smooth", "e2", "||box A d_{x1} f||_{L^inf_{x1} L^2}", "<k1>^{1/2} ||box f||_{L^{(2+p)/(1+p)}}", true, 2},
    {"strichartz-maximal", "e3", "||box d_{x1} A f||_{L^q_{x1} L^inf}", "<k1> <k1>^{1/q} ||box f||_{L^{(2+p)/(1+p)}}",
     true, 2},
    {"smooth-maximal", "e4", "||box d_{x1} A f||_{L^q_{x1} L^inf}", "<k1>^{1/2} <k1>^{1/q} ||box f||_{L^1_{x1} L^2}",
     true, 2},
    {"l2-anisotropic", "f", "||box S(t)u0||_{L^q_{x1} L^qbar}", "<k1>^{1/q} ||box u0||_2", false, 2},
    {"maximal-smoothing", "g", "||box A f||_{L^q_{x1} L^qbar}", "<k1>^{1/q-1/2} ||box f||_{L^1_{x1} L^2}", true, 1},
    {"uniform-lp", "h", "sup_t ||box S(t)u0||_p / (1 + t^{n/2})", "||box u0||_p", false, 2},
    {"gabor-general", "i", "||S(t)u0||_{L^p_{x1} L^pbar}", "||u0||_{M^{1/p+1-1/r}_{r,1}}", false, 2},
};

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

void admissible_gabor(int n, double p, double pbar, const std::string& what) {
  const double lhs = n * (0.5 - inv(pbar));
  const double rhs = inv(p);
  const bool strict = lhs > rhs + 1e-12;
  const bool equal = std::abs(lhs - rhs) <= 1e-12 && p > 1.0 && !std::isinf(p);
  if (!(strict || equal)) {
    throw ValidationError(what + ": needs n(1/2 - 1/pbar) > 1/p, or equality with 1 < p < inf");
  }
}

void admissible_l2(int n, double q, double qbar, const std::string& what) {
  require(q >= 2.0 && qbar >= 2.0, what + ": needs 2 <= q, qbar");
  const double lhs = n * (0.5 - 2.0 * inv(qbar));
  const double rhs = 2.0 * inv(q);
  const bool strict = lhs > rhs + 1e-12;
  const bool equal = std::abs(lhs - rhs) <= 1e-12 && q > 2.0 && !std::isinf(q);
  if (!(strict || equal)) {
    throw ValidationError(what + ": needs n(1/2 - 2/qbar) > 2/q, or equality with 2 < q < inf");
  }
}

CaseRecipe recipe_for(const std::string& id, int n, const EstimateParams& pr, const std::vector<int>& ks) {
  CaseRecipe c;
  const double sp = pr.strichartz_p;
  auto strichartz_ok = [&]() {
    if (!(sp >= 4.0 / n) || std::isinf(sp)) throw ValidationError(id + ": needs 4/n <= p < inf");
  };
  if (id == "gabor-global") {
    admissible_gabor(n, pr.p, pr.pbar, id);
    c.box_lhs = false;
    c.lhs = {MixedNorm::axis_outer(0, pr.p, pr.pbar)};
    c.rhs = CaseRecipe::Rhs::Modulation;
    c.modulation = {inv(pr.p), 1.0, 1.0};
  } else if (id == "l1-anisotropic") {
    require(n == 2, id + ": defined for n = 2");
    admissible_gabor(n, 2.0, 4.0, id);
    c.lhs = {MixedNorm::axis_outer(0, 2.0, 4.0), MixedNorm::axis_outer(0, 2.0, kInf)};
    c.rhs = CaseRecipe::Rhs::L1Data;
    c.weight = 0.5;
  } else if (id == "smooth-effect") {
    c.derivative = 0.5;
    c.lhs = {MixedNorm::axis_outer(0, kInf, 2.0)};
  } else if (id == "smooth-effect-duhamel") {
    c.forcing = true;
    c.derivative = 1.0;
    c.lhs = {MixedNorm::axis_outer(0, kInf, 2.0)};
    c.rhs = CaseRecipe::Rhs::ForcingMixed;
    c.forcing_norm = MixedNorm::axis_outer(0, 1.0, 2.0);
  } else if (id == "strichartz") {
    strichartz_ok();
    c.lhs = {MixedNorm::time_outer(kInf, 2.0), MixedNorm::joint(2.0 + sp)};
  } else if (id == "smooth-strichartz") {
    strichartz_ok();
    c.forcing = true;
    c.derivative = 1.0;
    c.lhs = {MixedNorm::time_outer(kInf, 2.0), MixedNorm::joint(2.0 + sp)};
    c.rhs = CaseRecipe::Rhs::ForcingMixed;
    c.forcing_norm = MixedNorm::axis_outer(0, 1.0, 2.0);
    c.weight = 0.5;
  } else if (id == "strichartz-smooth") {
    strichartz_ok();
    c.forcing = true;
    c.derivative = 1.0;
    c.lhs = {MixedNorm::axis_outer(0, kInf, 2.0)};
    c.rhs = CaseRecipe::Rhs::ForcingMixed;
    c.forcing_norm = MixedNorm::joint((2.0 + sp) / (1.0 + sp));
    c.weight = 0.5;
  } else if (id == "strichartz-maximal") {
    strichartz_ok();
    require(pr.q >= 2.0, id + ": needs 2 <= q <= inf");
    c.forcing = true;
    c.derivative = 1.0;
    c.lhs = {MixedNorm::axis_outer(0, pr.q, kInf)};
    c.rhs = CaseRecipe::Rhs::ForcingMixed;
    c.forcing_norm = MixedNorm::joint((2.0 + sp) / (1.0 + sp));
    c.weight = 1.0 + inv(pr.q);
  } else if (id == "smooth-maximal") {
    strichartz_ok();
    require(pr.q > 2.0, id + ": needs 2 < q <= inf");
    c.forcing = true;
    c.derivative = 1.0;
    c.lhs = {MixedNorm::axis_outer(0, pr.q, kInf)};
    c.rhs = CaseRecipe::Rhs::ForcingMixed;
    c.forcing_norm = MixedNorm::axis_outer(0, 1.0, 2.0);
    c.weight = 0.5 + inv(pr.q);
  } else if (id == "l2-anisotropic") {
    admissible_l2(n, pr.q, pr.qbar, id);
    c.lhs = {MixedNorm::axis_outer(0, pr.q, pr.qbar)};
    c.weight = inv(pr.q);
  } else if (id == "maximal-smoothing") {
    admissible_l2(n, pr.q, pr.qbar, id);
    for (int k : ks) require(std::abs(k) >= 20, id + ": needs |k_1| >= 20");
    c.forcing = true;
    c.lhs = {MixedNorm::axis_outer(0, pr.q, pr.qbar)};
    c.rhs = CaseRecipe::Rhs::ForcingMixed;
    c.forcing_norm = MixedNorm::axis_outer(0, 1.0, 2.0);
    c.weight = inv(pr.q) - 0.5;
    c.secondary = true;
    c.secondary_weight = inv(pr.q);
  } else if (id == "uniform-lp") {
    require(pr.p >= 1.0, id + ": needs 1 <= p <= inf");
    c.rhs = CaseRecipe::Rhs::UniformLp;
  } else if (id == "gabor-general") {
    const double a = n * (1.0 / pr.r - 0.5 - inv(pr.pbar));
    const double b = inv(pr.p);
    require(pr.r >= 1.0 && pr.p >= 1.0, id + ": needs 1 <= r, p");
    const bool strict = a > b + 1e-12 && pr.r <= pr.p;
    const bool equal = std::abs(a - b) <= 1e-12 && pr.r < pr.p && !std::isinf(pr.p);
    if (!(strict || equal)) {
      throw ValidationError(id + ": needs n(1/r - 1/2 - 1/pbar) > 1/p with r <= p, or equality with r < p < inf");
    }
    c.box_lhs = false;
    c.lhs = {MixedNorm::axis_outer(0, pr.p, pr.pbar)};
    c.rhs = CaseRecipe::Rhs::Modulation;
    c.modulation = {inv(pr.p) + 1.0 - 1.0 / pr.r, pr.r, 1.0};
  } else {
    throw ValidationError("unknown estimate case '" + id + "'");
  }
  return c;
}

// Seeded datum number d of the family for lattice point k, centred at xc.
struct Datum {
  std::string family;
  ComplexField field;
};

Datum make_datum(const Grid& g, const LatticePoint& k, const std::array<double, 3>& xc, int d, std::uint64_t seed,
                 const Partition& P) {
  Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(d) * 7919ULL + static_cast<std::uint64_t>(std::abs(k[0])));
  const int n = g.dim;
  Datum out;
  const int kind = d % 6;
  if (kind <= 1) {
    out.family = "random-box";
    const cplx amp = rng.complex_normal();
    std::array<double, 3> slope{};
    for (int a = 0; a < n; ++a) slope[a] = rng.uniform(-0.3, 0.3);
    const double chirp = rng.uniform(-0.05, 0.05);
    const double width = rng.uniform(1.2, 2.0);
    out.field = sample(g, [&](const double* x) {
      double ph = 0.0, r2 = 0.0;
      for (int a = 0; a < n; ++a) {
        const double y = x[a] - xc[a];
        ph += k[a] * x[a] + slope[a] * y;
        r2 += y * y;
      }
      ph += chirp * r2;
      return amp * std::exp(-r2 / (2.0 * width * width)) * cplx(std::cos(ph), std::sin(ph));
    });
  } else if (kind <= 3) {
    out.family = "gabor-sum";
    std::vector<std::array<double, 3>> mods, trans;
    std::vector<cplx> coef;
    for (int j = 0; j < 3; ++j) {
      std::array<double, 3> m{}, l{};
      for (int a = 0; a < n; ++a) {
        m[a] = k[a] + rng.integer(-1, 1);
        l[a] = std::round(xc[a]) + rng.integer(-2, 2);
      }
      mods.push_back(m);
      trans.push_back(l);
      coef.push_back(rng.complex_normal());
    }
    out.field = sample(g, [&](const double* x) {
      cplx s{};
      for (std::size_t j = 0; j < coef.size(); ++j) {
        double ph = 0.0, r2 = 0.0;
        for (int a = 0; a < n; ++a) {
          ph += mods[j][a] * x[a];
          r2 += (x[a] - trans[j][a]) * (x[a] - trans[j][a]);
        }
        s += coef[j] * std::exp(-0.5 * r2) * cplx(std::cos(ph), std::sin(ph));
      }
      return s;
    });
  } else if (kind == 4) {
    out.family = "bump";
    out.field = sample(g, [&](const double* x) {
      double ph = 0.0, r2 = 0.0;
      for (int a = 0; a < n; ++a) {
        ph += k[a] * x[a];
        r2 += (x[a] - xc[a]) * (x[a] - xc[a]);
      }
      return bump_psi(std::sqrt(r2) / 2.5) * cplx(std::cos(ph), std::sin(ph));
    });
  } else {
    out.family = "modulated-gaussian";
    out.field = sample(g, [&](const double* x) {
      double ph = 0.0, r2 = 0.0;
      for (int a = 0; a < n; ++a) {
        ph += k[a] * x[a];
        r2 += (x[a] - xc[a]) * (x[a] - xc[a]);
      }
      return std::exp(-r2 / 4.5) * cplx(std::cos(ph), std::sin(ph));
    });
  }
  out.field = box_op(k, out.field, P);
  return out;
}

// Spectral multipliers that do not depend on time, evaluated once per grid.
struct SpectralTables {
  std::vector<double> quad;   // s * |xi|^2_pm
  std::vector<cplx> deriv;    // derivative factor along x_1
};

SpectralTables make_tables(const Grid& g, const Signature& eps, double derivative) {
  SpectralTables t;
  t.quad.resize(g.size());
  t.deriv.resize(g.size());
  const double s = time_sign();
  const auto st = g.strides();
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t rem = i;
    double xi[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
      xi[a] = g.xi(a, static_cast<int>(rem / st[a]));
      rem %= st[a];
    }
    t.quad[i] = s * eps.quadratic(xi);
    if (derivative == 0.0) {
      t.deriv[i] = 1.0;
    } else if (derivative == 1.0) {
      t.deriv[i] = cplx(0.0, xi[0]);
    } else {
      t.deriv[i] = std::pow(std::abs(xi[0]), derivative);
    }
  }
  return t;
}

// Spectrum at time t of the measured field for the given source.
void timed_spectrum(const std::vector<cplx>& base, const SpectralTables& tab, Source src, double t, bool with_deriv,
                    std::vector<cplx>& out) {
  out.resize(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double w = tab.quad[i];
    const double tw = t * w;
    const cplx e(std::cos(tw), std::sin(tw));
    cplx m;
    switch (src) {
      case Source::Free: m = e; break;
      case Source::Resonant: m = t * e; break;
      case Source::Constant:
        m = std::abs(tw) < 1e-8 ? cplx(t, 0.5 * t * tw) : (e - 1.0) / cplx(0.0, w);
        break;
    }
    out[i] = base[i] * m * (with_deriv ? tab.deriv[i] : cplx(1.0));
  }
}

struct RowResult {
  double lhs = 0.0;
  double norm = 0.0;
};

RowResult measure(const CaseRecipe& rc, const EstimateConfig& cfg, const Grid& g, const LatticePoint& k,
                  const ComplexField& datum, Source src, double T, const Partition& P, double uniform_p) {
  const int J = cfg.slices;
  const double dt = T / J;
  const SpectralTables tab = make_tables(g, cfg.eps, rc.derivative);
  const ComplexField dh = fourier_forward(datum);
  std::vector<cplx> boxed(g.size());
  box_spectrum_into(k, dh, P, boxed);
  const std::vector<cplx>& lhs_base = rc.box_lhs ? boxed : dh.v;

  RowResult res;
  std::vector<cplx> buf;
  if (rc.rhs == CaseRecipe::Rhs::UniformLp) {
    const ComplexField b0(g, [&] { std::vector<cplx> v = boxed; fourier_inverse_inplace(g, v); return v; }());
    const double n0 = lp_norm(b0, uniform_p);
    res.norm = n0;
    for (int j = 0; j <= J; ++j) {
      const double t = j * dt;
      timed_spectrum(boxed, tab, Source::Free, t, false, buf);
      fourier_inverse_inplace(g, buf);
      const double r = lp_norm(ComplexField(g, buf), uniform_p) / (1.0 + std::pow(t, g.dim / 2.0));
      res.lhs = std::max(res.lhs, r);
    }
    return res;
  }

  std::vector<MixedNormAccumulator> lhs_acc;
  for (const auto& m : rc.lhs) lhs_acc.emplace_back(g, m, dt);
  std::vector<MixedNormAccumulator> rhs_acc;
  if (rc.rhs == CaseRecipe::Rhs::ForcingMixed) rhs_acc.emplace_back(g, rc.forcing_norm, dt);
  const bool deriv = rc.derivative != 0.0;
  for (int j = 0; j < J; ++j) {
    const double t = j * dt;
    timed_spectrum(lhs_base, tab, src, t, deriv, buf);
    fourier_inverse_inplace(g, buf);
    for (auto& a : lhs_acc) a.push(buf.data());
    if (!rhs_acc.empty()) {
      // Forcing slice box_k f(t): S(t) h for the resonant family, h for the constant one.
      if (src == Source::Resonant) {
        timed_spectrum(boxed, tab, Source::Free, t, false, buf);
      } else {
        buf = boxed;
      }
      fourier_inverse_inplace(g, buf);
      rhs_acc.front().push(buf.data());
    }
  }
  for (const auto& a : lhs_acc) res.lhs = std::max(res.lhs, a.value());

  switch (rc.rhs) {
    case CaseRecipe::Rhs::L2Data: res.norm = l2_norm_from_spectrum(ComplexField(g, boxed)); break;
    case CaseRecipe::Rhs::L1Data: {
      std::vector<cplx> v = boxed;
      fourier_inverse_inplace(g, v);
      res.norm = lp_norm(ComplexField(g, v), 1.0);
      break;
    }
    case CaseRecipe::Rhs::Modulation: res.norm = modulation_norm(datum, rc.modulation, P); break;
    case CaseRecipe::Rhs::ForcingMixed: res.norm = rhs_acc.front().value(); break;
    case CaseRecipe::Rhs::UniformLp: break;
  }
  return res;
}

double window_for(const Grid& g, int k, double scale) {
  require(k != 0, "estimate sweeps need k_1 != 0");
  return scale * g.half_extent[0] / (4.0 * std::abs(k));
}

EstimateReport rows_on(const EstimateConfig& cfg, const Grid& g, double window_scale) {
  const EstimateCase& ec = find_estimate_case(cfg.case_id);
  require(cfg.eps.dim == g.dim, "signature length must match the grid dimension");
  require(cfg.slices >= 2, "need at least two time slices");
  require(cfg.family_size >= 1, "family size must be positive");
  require(!cfg.k_list.empty(), "k list must not be empty");
  const CaseRecipe rc = recipe_for(cfg.case_id, g.dim, cfg.params, cfg.k_list);
  const Partition P = build_partition();

  struct Job {
    int k;
    int datum;
    Source src;
  };
  std::vector<Job> jobs;
  for (int k : cfg.k_list) {
    for (int d = 0; d < cfg.family_size; ++d) {
      if (rc.forcing) {
        jobs.push_back({k, d, Source::Resonant});
        jobs.push_back({k, d, Source::Constant});
      } else {
        jobs.push_back({k, d, Source::Free});
      }
    }
  }
  const double s = time_sign();
  std::vector<EstimateRow> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& jb = jobs[i];
    LatticePoint kk{jb.k, 0, 0};
    std::array<double, 3> xc{};
    const double dir = (s * cfg.eps.eps[0] * jb.k) > 0 ? 1.0 : -1.0;
    xc[0] = dir * 3.0 * g.half_extent[0] / 8.0;
    for (int a = 0; a < g.dim; ++a) xc[a] += cfg.shift[a];
    const Datum dat = make_datum(g, kk, xc, jb.datum, cfg.seed, P);
    const double T = window_for(g, jb.k, window_scale);
    const RowResult rr = measure(rc, cfg, g, kk, dat.field, jb.src, T, P, cfg.params.p);
    EstimateRow& row = rows[i];
    row.k = jb.k;
    row.datum = jb.datum;
    row.family = dat.family;
    row.forcing = jb.src == Source::Free ? "none" : (jb.src == Source::Resonant ? "resonant" : "constant");
    row.window = T;
    row.lhs = rr.lhs;
    const double weight = std::pow(std::sqrt(1.0 + double(jb.k) * jb.k), rc.weight);
    row.rhs = weight * rr.norm;
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
  });

  EstimateReport rep;
  rep.case_id = ec.id;
  rep.rows = std::move(rows);
  rep.weight_exponent = rc.weight;
  std::vector<double> kx;
  for (int k : cfg.k_list) {
    double mx = 0.0;
    for (const auto& r : rep.rows) {
      if (r.k == k) mx = std::max(mx, r.ratio);
    }
    rep.k_values.push_back(k);
    rep.max_ratio_per_k.push_back(mx);
    rep.max_ratio = std::max(rep.max_ratio, mx);
    kx.push_back(std::sqrt(1.0 + double(k) * k));
  }
  if (cfg.k_list.size() >= 2) rep.slope = loglog_slope(kx, rep.max_ratio_per_k);
  if (rc.secondary) {
    rep.has_secondary = true;
    std::vector<double> sec;
    for (std::size_t i = 0; i < kx.size(); ++i) {
      sec.push_back(rep.max_ratio_per_k[i] * std::pow(kx[i], rc.weight - rc.secondary_weight));
    }
    if (kx.size() >= 2) rep.secondary_slope = loglog_slope(kx, sec);
  }
  return rep;
}

}  // namespace

const std::vector<EstimateCase>& estimate_cases() { return kCases; }

const EstimateCase& find_estimate_case(const std::string& id) {
  for (const auto& c : kCases) {
    if (c.id == id || c.label == id) return c;
  }
  throw ValidationError("unknown estimate case '" + id + "'");
}

EstimateConfig default_estimate_config(const std::string& case_id) {
  const EstimateCase& ec = find_estimate_case(case_id);
  EstimateConfig cfg;
  cfg.case_id = ec.id;
  const double L = 8.0 * std::numbers::pi;
  if (ec.default_dim == 1) {
    cfg.grid = make_grid(1, L, 832);
    cfg.eps = Signature::elliptic(1);
    cfg.k_list = {20, 27, 36, 48};
    cfg.params.q = 8.0;
    cfg.params.qbar = kInf;
  } else {
    cfg.grid = make_grid({L, 0.5 * L}, {448, 32});
    cfg.eps = Signature::from({1, -1});
    cfg.k_list = {3, 6, 12, 24};
  }
  if (ec.id == "gabor-general") {
    cfg.params.p = 4.0;
    cfg.params.pbar = kInf;
    cfg.params.r = 4.0 / 3.0;
  } else if (ec.id == "uniform-lp") {
    cfg.params.p = 1.0;
  }
  cfg.slices = 64;
  return cfg;
}

bool EstimateReport::slope_ok() const {
  return slope <= slope_tolerance && std::isfinite(max_ratio) && (!has_secondary || secondary_slope <= secondary_bound);
}

bool EstimateReport::refinement_ok() const { return refinement_change < 0.2; }

EstimateReport run_estimate_rows(const EstimateConfig& cfg) { return rows_on(cfg, cfg.grid, cfg.window_scale); }

EstimateReport run_estimate(const EstimateConfig& cfg) {
  require(cfg.k_list.size() >= 4, "slope fits need at least four k values");
  EstimateReport rep = rows_on(cfg, cfg.grid, cfg.window_scale);
  if (cfg.check_refinement) {
    const EstimateReport fine = rows_on(cfg, refined_grid(cfg.grid, 2), cfg.window_scale);
    rep.refined_max_ratio = fine.max_ratio;
    rep.refinement_change = std::abs(fine.max_ratio - rep.max_ratio) / rep.max_ratio;
  }
  if (cfg.check_window) {
    const EstimateReport wide = rows_on(cfg, cfg.grid, 1.5 * cfg.window_scale);
    rep.window_max_ratio = wide.max_ratio;
    rep.window_change = std::abs(wide.max_ratio - rep.max_ratio) / rep.max_ratio;
  }
  return rep;
}

void write_report_csv(std::ostream& os, const EstimateReport& r) {
  os << "case,k,datum,family,forcing,window,lhs,rhs,ratio\n";
  os.precision(12);
  for (const auto& row : r.rows) {
    os << r.case_id << ',' << row.k << ',' << row.datum << ',' << row.family << ',' << row.forcing << ','
       << row.window << ',' << row.lhs << ',' << row.rhs << ',' << row.ratio << '\n';
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "slope fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  require(den > 0.0, "slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

ConvolutionResult convolution_lemma_check(const std::vector<double>& a, int first, double theta, double p, double r,
                                          double b, double c) {
  require(std::abs(c) >= 1.0, "convolution lemma needs |c| >= 1");
  require(p >= 1.0 && r >= 1.0, "convolution lemma needs 1 <= p, r <= inf");
  require(theta > 0.0, "convolution lemma needs theta > 0");
  const double rp = 1.0 - inv(r);  // 1/r'
  const double crit = rp + inv(p);
  const bool strict = theta > crit + 1e-12 && p >= r;
  const bool equal = std::abs(theta - crit) <= 1e-12 && crit < 1.0 && p > 1.0 && !std::isinf(p);
  if (!(strict || equal)) {
    throw ValidationError("convolution lemma needs theta > 1/r' + 1/p with p >= r, or theta = 1/r' + 1/p in (0,1) with 1 < p < inf");
  }
  ConvolutionResult res;
  double anorm = 0.0;
  std::vector<double> kinks;
  std::vector<double> w;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = std::abs(a[i]);
    anorm = std::isinf(r) ? std::max(anorm, v) : anorm + std::pow(v, r);
    if (v != 0.0) {
      kinks.push_back(static_cast<double>(first + static_cast<int>(i)) - b);
      w.push_back(v);
    }
  }
  if (!std::isinf(r)) anorm = std::pow(anorm, 1.0 / r);
  const double ac = std::abs(c);
  res.rhs_scale = std::pow(std::sqrt(1.0 + c * c), inv(p) + rp) * anorm;
  if (kinks.empty()) return res;

  auto g = [&](double x) {
    double s = 0.0;
    for (std::size_t i = 0; i < kinks.size(); ++i) s += w[i] * std::pow(1.0 + std::abs(x - kinks[i]) / ac, -theta);
    return s;
  };
  if (std::isinf(p)) {
    for (double x : kinks) res.lhs = std::max(res.lhs, g(x));
  } else {
    auto gp = [&](double x) { return std::pow(g(x), p); };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
      if (kinks[i + 1] > kinks[i]) {
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(gp, kinks[i], kinks[i + 1], 15, 1e-13);
      }
    }
    boost::math::quadrature::exp_sinh<double> tail;
    const double lo = kinks.front(), hi = kinks.back();
    total += tail.integrate([&](double y) { return gp(hi + y); }, 1e-13);
    total += tail.integrate([&](double y) { return gp(lo - y); }, 1e-13);
    res.lhs = std::pow(total, 1.0 / p);
  }
  res.ratio = res.rhs_scale > 0.0 ? res.lhs / res.rhs_scale : 0.0;
  return res;
}

ConvolutionSweep convolution_sweep(double theta, double p, double r, const std::vector<double>& c_values,
                                   std::uint64_t seed) {
  require(c_values.size() >= 2, "c sweep needs at least two values");
  std::vector<std::pair<std::vector<double>, int>> family;
  family.push_back({{1.0}, 0});
  family.push_back({std::vector<double>(81, 1.0), -40});
  Rng rng(seed);
  std::vector<double> rnd(41);
  for (auto& v : rnd) v = rng.uniform(0.0, 1.0);
  family.push_back({rnd, -20});
  std::vector<double> dec(61);
  for (int i = 0; i < 61; ++i) dec[i] = std::pow(1.0 + std::abs(i - 30), -0.75);
  family.push_back({dec, -30});

  ConvolutionSweep sw;
  sw.c_values = c_values;
  sw.exponent = inv(p) + 1.0 - inv(r);
  std::vector<double> cx;
  for (double c : c_values) {
    double best = 0.0;
    for (const auto& [a, first] : family) {
      const ConvolutionResult res = convolution_lemma_check(a, first, theta, p, r, 0.0, c);
      double an = 0.0;
      for (double v : a) an = std::isinf(r) ? std::max(an, std::abs(v)) : an + std::pow(std::abs(v), r);
      if (!std::isinf(r)) an = std::pow(an, 1.0 / r);
      best = std::max(best, res.lhs / an);
    }
    sw.sup_ratio.push_back(best);
    cx.push_back(std::sqrt(1.0 + c * c));
  }
  sw.slope = loglog_slope(cx, sw.sup_ratio);
  return sw;
}

}  // namespace modlab
