#include "modlab/fields.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

namespace modlab {

namespace {

// Compensated running sum (Neumaier variant of Kahan summation).
inline void neumaier_add(double& sum, double& comp, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

inline double pow_abs(double a, double p) {
  if (p == 2.0) return a * a;
  if (p == 1.0) return a;
  if (p == 4.0) {
    const double s = a * a;
    return s * s;
  }
  return std::pow(a, p);
}

class FftPlan {
public:
  FftPlan(const std::vector<int>& dims, int direction) {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    size_ = n;
    buffer_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan_ = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buffer_, buffer_, direction,
                          FFTW_ESTIMATE);
    if (!plan_) throw NumericalError("FFTW planning failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(plan_);
    fftw_free(buffer_);
  }

  void execute(std::vector<cplx>& data) {
    std::copy(data.begin(), data.end(), reinterpret_cast<cplx*>(buffer_));
    fftw_execute(plan_);
    std::copy(reinterpret_cast<cplx*>(buffer_), reinterpret_cast<cplx*>(buffer_) + size_,
              data.begin());
  }

private:
  std::size_t size_ = 0;
  fftw_complex* buffer_ = nullptr;
  fftw_plan plan_ = nullptr;
};

FftPlan& plan_for(const Grid& g, int direction) {
  using Key = std::tuple<int, int, int, int, int>;
  thread_local std::map<Key, std::unique_ptr<FftPlan>> cache;
  const Key key{g.dim, g.samples[0], g.dim > 1 ? g.samples[1] : 1, g.dim > 2 ? g.samples[2] : 1,
                direction};
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::vector<int> dims(g.samples.begin(), g.samples.begin() + g.dim);
    it = cache.emplace(key, std::make_unique<FftPlan>(dims, direction)).first;
  }
  return *it->second;
}

// (-1)^{sum of multi-index}, the checkerboard that recenters the transform.
void checkerboard(const Grid& g, std::vector<cplx>& data, double scale) {
  const auto st = g.strides();
  const std::size_t n = data.size();
  for (std::size_t idx = 0; idx < n; ++idx) {
    int parity = 0;
    std::size_t rem = idx;
    for (int a = 0; a < g.dim; ++a) {
      parity += static_cast<int>(rem / st[a]);
      rem %= st[a];
    }
    data[idx] *= (parity & 1) ? -scale : scale;
  }
}

int half_index_parity(const Grid& g) {
  int s = 0;
  for (int a = 0; a < g.dim; ++a) s += g.samples[a] / 2;
  return s & 1;
}

void for_each_node(const Grid& g, bool frequency, const std::function<void(std::size_t, const double*)>& fn) {
  const auto st = g.strides();
  double coord[3] = {0.0, 0.0, 0.0};
  const std::size_t n = g.size();
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx;
    for (int a = 0; a < g.dim; ++a) {
      const int j = static_cast<int>(rem / st[a]);
      rem %= st[a];
      coord[a] = frequency ? g.xi(a, j) : g.x(a, j);
    }
    fn(idx, coord);
  }
}

}  // namespace

double Grid::dxi(int axis) const { return std::numbers::pi / half_extent[axis]; }

int Grid::k_max(int axis) const {
  return static_cast<int>(std::floor(max_abs_xi(axis) + 1e-12)) - 2;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= dx(a);
  return v;
}

double Grid::freq_cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= dxi(a);
  return v;
}

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(samples[a]);
  return n;
}

std::array<std::size_t, 3> Grid::strides() const {
  std::array<std::size_t, 3> s{1, 1, 1};
  for (int a = dim - 2; a >= 0; --a) s[a] = s[a + 1] * static_cast<std::size_t>(samples[a + 1]);
  return s;
}

bool Grid::operator==(const Grid& o) const {
  if (dim != o.dim) return false;
  for (int a = 0; a < dim; ++a) {
    if (samples[a] != o.samples[a] || half_extent[a] != o.half_extent[a]) return false;
  }
  return true;
}

Grid make_grid(const std::vector<double>& half_extent, const std::vector<int>& samples) {
  require(!samples.empty() && samples.size() <= 3, "grid dimension must be 1, 2 or 3");
  require(half_extent.size() == samples.size(), "half_extent and samples must have equal length");
  Grid g;
  g.dim = static_cast<int>(samples.size());
  for (int a = 0; a < g.dim; ++a) {
    if (samples[a] % 2 != 0) {
      std::ostringstream msg;
      msg << "samples on axis " << a << " must be even (got " << samples[a] << ")";
      throw ValidationError(msg.str());
    }
    require(samples[a] >= 16, "samples per axis must be at least 16");
    require(half_extent[a] > 0.0 && std::isfinite(half_extent[a]), "half_extent must be positive");
    g.samples[a] = samples[a];
    g.half_extent[a] = half_extent[a];
  }
  return g;
}

Grid make_grid(int dim, double half_extent, int samples) {
  require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
  return make_grid(std::vector<double>(dim, half_extent), std::vector<int>(dim, samples));
}

Signature Signature::elliptic(int dim) {
  Signature s;
  s.dim = dim;
  return s;
}

Signature Signature::from(const std::vector<int>& eps) {
  require(!eps.empty() && eps.size() <= 3, "signature length must be 1..3");
  Signature s;
  s.dim = static_cast<int>(eps.size());
  for (int a = 0; a < s.dim; ++a) {
    require(eps[a] == 1 || eps[a] == -1, "signature entries must be +1 or -1");
    s.eps[a] = eps[a];
  }
  return s;
}

double Signature::quadratic(const double* xi) const {
  double q = 0.0;
  for (int a = 0; a < dim; ++a) q += eps[a] * xi[a] * xi[a];
  return q;
}

ComplexField::ComplexField(const Grid& g, std::vector<cplx> values) : grid(g), v(std::move(values)) {
  require(v.size() == grid.size(), "sample count does not match grid");
}

ComplexField& ComplexField::operator+=(const ComplexField& o) {
  require(grid == o.grid, "field grids differ");
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& o) {
  require(grid == o.grid, "field grids differ");
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
  return *this;
}

ComplexField& ComplexField::operator*=(cplx c) {
  for (auto& z : v) z *= c;
  return *this;
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
ComplexField operator*(cplx c, ComplexField a) { return a *= c; }

ComplexField sample(const Grid& g, const std::function<cplx(const double*)>& fn) {
  ComplexField f(g);
  for_each_node(g, false, [&](std::size_t i, const double* x) { f.v[i] = fn(x); });
  return f;
}

ComplexField sample_spectrum(const Grid& g, const std::function<cplx(const double*)>& fn) {
  ComplexField f(g);
  for_each_node(g, true, [&](std::size_t i, const double* xi) { f.v[i] = fn(xi); });
  return f;
}

ComplexField conj(const ComplexField& f) {
  ComplexField out = f;
  for (auto& z : out.v) z = std::conj(z);
  return out;
}

void check_finite(const ComplexField& f) {
  for (const auto& z : f.v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ValidationError("field contains non-finite samples");
    }
  }
}

// With x_j = -L + j dx and xi_c = c dxi (c = m - N/2), the kernel factors as
// e^{-i xi_c x_j} = (-1)^c e^{-2 pi i c j / N}. Premultiplying by (-1)^j
// shifts the DFT output by N/2, which lands it in centered order.
void fourier_forward_inplace(const Grid& g, std::vector<cplx>& data) {
  checkerboard(g, data, 1.0);
  plan_for(g, FFTW_FORWARD).execute(data);
  const double sign = half_index_parity(g) ? -1.0 : 1.0;
  checkerboard(g, data, sign * g.cell_volume());
}

void fourier_inverse_inplace(const Grid& g, std::vector<cplx>& data) {
  const double sign = half_index_parity(g) ? -1.0 : 1.0;
  checkerboard(g, data, sign);
  plan_for(g, FFTW_BACKWARD).execute(data);
  double scale = 1.0;
  for (int a = 0; a < g.dim; ++a) scale /= g.samples[a] * g.dx(a);
  checkerboard(g, data, scale);
}

ComplexField fourier_forward(const ComplexField& f) {
  ComplexField out = f;
  fourier_forward_inplace(out.grid, out.v);
  return out;
}

ComplexField fourier_inverse(const ComplexField& fhat) {
  ComplexField out = fhat;
  fourier_inverse_inplace(out.grid, out.v);
  return out;
}

ComplexField apply_multiplier(const ComplexField& f, const std::function<cplx(const double*)>& m) {
  ComplexField fh = fourier_forward(f);
  for_each_node(f.grid, true, [&](std::size_t i, const double* xi) { fh.v[i] *= m(xi); });
  fourier_inverse_inplace(fh.grid, fh.v);
  return fh;
}

ComplexField fractional_derivative(const ComplexField& f, int axis, double order) {
  require(axis >= 0 && axis < f.grid.dim, "axis out of range");
  require(order >= 0.0, "derivative order must be nonnegative");
  if (order == 0.0) return fourier_inverse(fourier_forward(f));
  return apply_multiplier(f, [axis, order](const double* xi) {
    return cplx(std::pow(std::abs(xi[axis]), order), 0.0);
  });
}

ComplexField partial_derivative(const ComplexField& f, int axis) {
  require(axis >= 0 && axis < f.grid.dim, "axis out of range");
  return apply_multiplier(f, [axis](const double* xi) { return cplx(0.0, xi[axis]); });
}

double lp_norm(const ComplexField& f, double p) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& z : f.v) m = std::max(m, std::abs(z));
    return m;
  }
  double s = 0.0, c = 0.0;
  for (const auto& z : f.v) neumaier_add(s, c, pow_abs(std::abs(z), p));
  return std::pow((s + c) * f.grid.cell_volume(), 1.0 / p);
}

double l2_norm(const ComplexField& f) { return lp_norm(f, 2.0); }

double l2_norm_from_spectrum(const ComplexField& fhat) {
  double s = 0.0, c = 0.0;
  for (const auto& z : fhat.v) neumaier_add(s, c, std::norm(z));
  const double scale = fhat.grid.freq_cell_volume() / std::pow(2.0 * std::numbers::pi, fhat.grid.dim);
  return std::sqrt((s + c) * scale);
}

cplx inner_product(const ComplexField& f, const ComplexField& g) {
  require(f.grid == g.grid, "field grids differ");
  double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    const cplx z = f.v[i] * std::conj(g.v[i]);
    neumaier_add(sr, cr, z.real());
    neumaier_add(si, ci, z.imag());
  }
  return cplx(sr + cr, si + ci) * f.grid.cell_volume();
}

SpaceTimeField make_spacetime(const Grid& g, double t0, double dt, std::size_t count) {
  SpaceTimeField u;
  u.grid = g;
  u.t0 = t0;
  u.dt = dt;
  u.slices.assign(count, ComplexField(g));
  return u;
}

MixedNorm MixedNorm::axis_outer(int axis, double p, double p_bar) {
  require(p >= 1.0 && p_bar >= 1.0, "Lebesgue exponents must be >= 1");
  return MixedNorm{Kind::AxisOuter, axis, p, p_bar};
}

MixedNorm MixedNorm::time_outer(double q, double p) {
  require(q >= 1.0 && p >= 1.0, "Lebesgue exponents must be >= 1");
  return MixedNorm{Kind::TimeOuter, 0, q, p};
}

MixedNorm MixedNorm::joint(double p) {
  require(p >= 1.0, "Lebesgue exponent must be >= 1");
  return MixedNorm{Kind::Joint, 0, p, p};
}

MixedNormAccumulator::MixedNormAccumulator(const Grid& g, const MixedNorm& spec, double dt)
    : grid_(g), spec_(spec), dt_(dt) {
  require(dt > 0.0, "time step must be positive");
  if (spec.kind == MixedNorm::Kind::AxisOuter) {
    require(spec.axis >= 0 && spec.axis < g.dim, "outer axis out of range");
    sum_.assign(static_cast<std::size_t>(g.samples[spec.axis]), 0.0);
    comp_.assign(sum_.size(), 0.0);
  }
}

void MixedNormAccumulator::push(const cplx* u) {
  const std::size_t n = grid_.size();
  const double dv = grid_.cell_volume();
  switch (spec_.kind) {
    case MixedNorm::Kind::AxisOuter: {
      const auto st = grid_.strides();
      const std::size_t stride = st[spec_.axis];
      const std::size_t extent = static_cast<std::size_t>(grid_.samples[spec_.axis]);
      const bool inner_inf = std::isinf(spec_.p_inner);
      const double w = dv / grid_.dx(spec_.axis) * dt_;
      for (std::size_t idx = 0; idx < n; ++idx) {
        const std::size_t j = (idx / stride) % extent;
        const double a = std::abs(u[idx]);
        if (inner_inf) {
          sum_[j] = std::max(sum_[j], a);
        } else {
          neumaier_add(sum_[j], comp_[j], pow_abs(a, spec_.p_inner) * w);
        }
      }
      break;
    }
    case MixedNorm::Kind::TimeOuter: {
      double slice_norm;
      if (std::isinf(spec_.p_inner)) {
        slice_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) slice_norm = std::max(slice_norm, std::abs(u[i]));
      } else {
        double s = 0.0, c = 0.0;
        for (std::size_t i = 0; i < n; ++i) neumaier_add(s, c, pow_abs(std::abs(u[i]), spec_.p_inner));
        slice_norm = std::pow((s + c) * dv, 1.0 / spec_.p_inner);
      }
      if (std::isinf(spec_.p_outer)) {
        running_max_ = std::max(running_max_, slice_norm);
      } else {
        neumaier_add(total_, total_comp_, pow_abs(slice_norm, spec_.p_outer) * dt_);
      }
      break;
    }
    case MixedNorm::Kind::Joint: {
      if (std::isinf(spec_.p_outer)) {
        for (std::size_t i = 0; i < n; ++i) running_max_ = std::max(running_max_, std::abs(u[i]));
      } else {
        double s = 0.0, c = 0.0;
        for (std::size_t i = 0; i < n; ++i) neumaier_add(s, c, pow_abs(std::abs(u[i]), spec_.p_outer));
        neumaier_add(total_, total_comp_, (s + c) * dv * dt_);
      }
      break;
    }
  }
  ++pushed_;
}

double MixedNormAccumulator::value() const {
  if (pushed_ == 0) return 0.0;
  switch (spec_.kind) {
    case MixedNorm::Kind::AxisOuter: {
      const bool inner_inf = std::isinf(spec_.p_inner);
      const bool outer_inf = std::isinf(spec_.p_outer);
      double s = 0.0, c = 0.0, m = 0.0;
      for (std::size_t j = 0; j < sum_.size(); ++j) {
        const double inner = inner_inf ? sum_[j] : std::pow(sum_[j] + comp_[j], 1.0 / spec_.p_inner);
        if (outer_inf) {
          m = std::max(m, inner);
        } else {
          neumaier_add(s, c, pow_abs(inner, spec_.p_outer));
        }
      }
      if (outer_inf) return m;
      return std::pow((s + c) * grid_.dx(spec_.axis), 1.0 / spec_.p_outer);
    }
    case MixedNorm::Kind::TimeOuter:
    case MixedNorm::Kind::Joint:
      if (std::isinf(spec_.p_outer)) return running_max_;
      return std::pow(total_ + total_comp_, 1.0 / spec_.p_outer);
  }
  return 0.0;
}

double mixed_norm(const SpaceTimeField& u, const MixedNorm& spec) {
  require(u.slices.size() >= 2, "space-time field needs at least two time slices");
  MixedNormAccumulator acc(u.grid, spec, u.dt);
  for (std::size_t j = 0; j + 1 < u.slices.size(); ++j) acc.push(u.slices[j]);
  return acc.value();
}

double anisotropic_norm(const SpaceTimeField& u, int outer_axis, double p_outer, double p_inner) {
  if (outer_axis < 0 || outer_axis >= u.grid.dim) throw ValidationError("outer axis out of range");
  return mixed_norm(u, MixedNorm::axis_outer(outer_axis, p_outer, p_inner));
}

Grid refined_grid(const Grid& g, int factor) {
  require(factor >= 1, "refinement factor must be positive");
  Grid out = g;
  for (int a = 0; a < g.dim; ++a) out.samples[a] = g.samples[a] * factor;
  return out;
}

ComplexField spectral_resize(const ComplexField& fhat, const Grid& target) {
  const Grid& src = fhat.grid;
  require(src.dim == target.dim, "spectral_resize needs equal dimensions");
  for (int a = 0; a < src.dim; ++a) {
    require(src.half_extent[a] == target.half_extent[a], "spectral_resize needs equal half extents");
  }
  ComplexField out(target);
  const auto ss = src.strides();
  const auto ts = target.strides();
  // Offsets between centered index ranges along each axis.
  std::array<int, 3> count{1, 1, 1}, src_off{0, 0, 0}, dst_off{0, 0, 0};
  for (int a = 0; a < src.dim; ++a) {
    const int ns = src.samples[a], nt = target.samples[a];
    const int c = std::min(ns, nt);
    count[a] = c;
    src_off[a] = ns / 2 - c / 2;
    dst_off[a] = nt / 2 - c / 2;
  }
  for (int i0 = 0; i0 < count[0]; ++i0) {
    for (int i1 = 0; i1 < (src.dim > 1 ? count[1] : 1); ++i1) {
      for (int i2 = 0; i2 < (src.dim > 2 ? count[2] : 1); ++i2) {
        const int idx[3] = {i0, i1, i2};
        std::size_t si = 0, ti = 0;
        for (int a = 0; a < src.dim; ++a) {
          si += static_cast<std::size_t>(idx[a] + src_off[a]) * ss[a];
          ti += static_cast<std::size_t>(idx[a] + dst_off[a]) * ts[a];
        }
        out.v[ti] = fhat.v[si];
      }
    }
  }
  return out;
}

}  // namespace modlab
