#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "modlab/errors.hpp"

namespace modlab {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform periodic grid on the box [-L_1, L_1) x ... x [-L_n, L_n).
// Nodes x_j = -L + j dx with dx = 2L/N; frequency nodes are stored in
// centered order, xi_m = (pi/L)(m - N/2) for m = 0 .. N-1.
struct Grid {
  int dim = 1;
  std::array<double, 3> half_extent{1.0, 1.0, 1.0};
  std::array<int, 3> samples{1, 1, 1};

  double dx(int axis) const { return 2.0 * half_extent[axis] / samples[axis]; }
  double dxi(int axis) const;
  double x(int axis, int j) const { return -half_extent[axis] + j * dx(axis); }
  double xi(int axis, int m) const { return dxi(axis) * (m - samples[axis] / 2); }
  double max_abs_xi(int axis) const { return dxi(axis) * (samples[axis] / 2); }
  // Largest lattice index whose window stays two units from the Nyquist edge.
  int k_max(int axis) const;
  double cell_volume() const;
  double freq_cell_volume() const;
  std::size_t size() const;
  // Row-major strides: axis 0 varies slowest.
  std::array<std::size_t, 3> strides() const;
  bool operator==(const Grid& other) const;
};

Grid make_grid(int dim, double half_extent, int samples);
Grid make_grid(const std::vector<double>& half_extent, const std::vector<int>& samples);

struct Signature {
  std::array<int, 3> eps{1, 1, 1};
  int dim = 1;

  static Signature elliptic(int dim);
  static Signature from(const std::vector<int>& eps);
  // sum_j eps_j xi_j^2
  double quadratic(const double* xi) const;
};

// Samples of a complex function on a grid; also used for frequency samples
// on the grid's xi nodes.
struct ComplexField {
  Grid grid;
  std::vector<cplx> v;

  ComplexField() = default;
  explicit ComplexField(const Grid& g) : grid(g), v(g.size(), cplx{}) {}
  ComplexField(const Grid& g, std::vector<cplx> values);

  std::size_t size() const { return v.size(); }
  cplx& operator[](std::size_t i) { return v[i]; }
  const cplx& operator[](std::size_t i) const { return v[i]; }

  ComplexField& operator+=(const ComplexField& o);
  ComplexField& operator-=(const ComplexField& o);
  ComplexField& operator*=(cplx c);
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(cplx c, ComplexField a);

// Evaluates fn at every spatial node; fn receives a pointer to dim coordinates.
ComplexField sample(const Grid& g, const std::function<cplx(const double*)>& fn);
// Evaluates fn at every frequency node.
ComplexField sample_spectrum(const Grid& g, const std::function<cplx(const double*)>& fn);
ComplexField conj(const ComplexField& f);
void check_finite(const ComplexField& f);

ComplexField fourier_forward(const ComplexField& f);
ComplexField fourier_inverse(const ComplexField& fhat);
// In-place transforms on raw sample vectors laid out as in ComplexField.
void fourier_forward_inplace(const Grid& g, std::vector<cplx>& data);
void fourier_inverse_inplace(const Grid& g, std::vector<cplx>& data);

// Applies m(xi) in frequency.
ComplexField apply_multiplier(const ComplexField& f, const std::function<cplx(const double*)>& m);
ComplexField fractional_derivative(const ComplexField& f, int axis, double order);
ComplexField partial_derivative(const ComplexField& f, int axis);

// Discrete L^p norm with weight dx^n; p = inf is the node maximum.
double lp_norm(const ComplexField& f, double p);
double l2_norm(const ComplexField& f);
// L^2 norm of a field from its spectrum (discrete Parseval).
double l2_norm_from_spectrum(const ComplexField& fhat);
cplx inner_product(const ComplexField& f, const ComplexField& g);

struct SpaceTimeField {
  Grid grid;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<ComplexField> slices;

  std::size_t num_times() const { return slices.size(); }
  double time(std::size_t j) const { return t0 + dt * static_cast<double>(j); }
  double span() const { return dt * static_cast<double>(slices.empty() ? 0 : slices.size() - 1); }
};

SpaceTimeField make_spacetime(const Grid& g, double t0, double dt, std::size_t count);

// Which mixed Lebesgue norm to accumulate.
struct MixedNorm {
  enum class Kind { AxisOuter, TimeOuter, Joint };
  Kind kind = Kind::Joint;
  int axis = 0;
  double p_outer = 2.0;
  double p_inner = 2.0;

  // L^{p}_{x_axis} L^{p_bar}_{(x_j)_{j != axis}, t}
  static MixedNorm axis_outer(int axis, double p, double p_bar);
  // L^{q}_t L^{p}_x
  static MixedNorm time_outer(double q, double p);
  // L^{p}_{x,t}
  static MixedNorm joint(double p);
};

// Streaming evaluator of a mixed norm over time slices pushed in order.
// value() may be called at any point and reports the norm over the slices
// pushed so far, which gives norms over expanding windows [t_0, t_j).
class MixedNormAccumulator {
public:
  MixedNormAccumulator(const Grid& g, const MixedNorm& spec, double dt);

  void push(const cplx* slice);
  void push(const ComplexField& slice) { push(slice.v.data()); }
  double value() const;
  std::size_t pushed() const { return pushed_; }
  const MixedNorm& spec() const { return spec_; }

private:
  Grid grid_;
  MixedNorm spec_;
  double dt_;
  std::size_t pushed_ = 0;
  // AxisOuter: one running sum (or max) per node of the outer axis.
  std::vector<double> sum_;
  std::vector<double> comp_;
  double total_ = 0.0;
  double total_comp_ = 0.0;
  double running_max_ = 0.0;
};

// L^{p_outer}_{x_i} L^{p_inner}_{rest, t} by left-endpoint Riemann sums over
// slices 0 .. J-1.
double anisotropic_norm(const SpaceTimeField& u, int outer_axis, double p_outer, double p_inner);
double mixed_norm(const SpaceTimeField& u, const MixedNorm& spec);

// Copies a centered spectrum onto a grid with the same half extents and a
// different sample count: zero-pads when growing, truncates when shrinking.
ComplexField spectral_resize(const ComplexField& fhat, const Grid& target);
// Grid with the same half extents and samples multiplied by factor.
Grid refined_grid(const Grid& g, int factor);

}  // namespace modlab
