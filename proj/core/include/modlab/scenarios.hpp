#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "modlab/fields.hpp"
#include "modlab/freqdecomp.hpp"

namespace modlab {

// Three real fields (imaginary parts zero) with s1^2 + s2^2 + s3^2 = 1.
struct SphereField {
  ComplexField s1, s2, s3;
  // max over nodes of | |s| - 1 |
  double unit_defect() const;
};

// s = (-t/<t>, sin(phi)/<t>, cos(phi)/<t>), phi = (x1^2 - x2^2) / (4 <t>).
SphereField blowup_sphere(double t, const Grid& g);

struct SchmapResidual {
  double residual = 0.0;         // max |d_t s - s x Box s| over the patch
  double box_s2_discrepancy = 0.0;  // closed form of Box s2 against the stencil
  double box_s3_discrepancy = 0.0;
};

// Centered second-order stencils of step h at points x in [-radius, radius]^2
// (points per axis), Box = d_1^2 - d_2^2. No transforms are involved.
SchmapResidual schmap_residual(double t, double radius, int points, double h);

struct BlowupReport {
  ComplexField u;
  double max_abs = 0.0;
  double min_denominator = 0.0;
  std::vector<std::array<double, 2>> singular_nodes;  // nodes with denominator < threshold
  bool suppressed = false;  // t == T and some node lies on the singular curve
};

// u = (T - t + i sin phi) / (<t - T> + cos phi), phi = (x1^2 - x2^2) / (4 <t - T>).
BlowupReport blowup_u(double t, double T, const Grid& g, double threshold = 1e-2);

// Pointwise value of the same closed form.
cplx blowup_value(double t, double T, double x1, double x2);

// max |u(t)| over points of the curve x1^2 - x2^2 = 4 pi, x1 > 0, |x2| <= half_width.
double blowup_curve_max(double t, double T, double half_width, int points);

struct PdeResidual {
  double residual = 0.0;          // i u_t + Box u - N(u)
  double printed_sign_residual = 0.0;  // i u_t - Box u - N(u)
};

// N(u) = 2 conj(u) / (1 + |u|^2) (u_x1^2 - u_x2^2), by stencils of step h on
// [-radius, radius]^2.
PdeResidual blowup_pde_residual(double t, double T, double radius, int points, double h);

SphereField stereo_to_sphere(const ComplexField& u);
// Throws ValidationError when 1 + s3 comes within 1e-6 of zero.
ComplexField sphere_to_stereo(const SphereField& s);

// max over s1, s2, s3 - 1 of their norms in M^{spec} divided by that of u.
double stereo_norm_constant(const ComplexField& u, const NormSpec& spec, const Partition& P);

struct IllposedSpec {
  int N = 16;
  double s = 0.0;
  double eps = 0.125;
  int kappa = 1;
};

// phi = 1 on [-1/2, 1/2], 0 outside (-1, 1), smooth step built from bump_psi.
double cutoff_phi(double xi);

// u0^ = N^{-s} (phi((xi_1 - N)/eps) + phi((xi_1 + N)/eps)) prod_{j >= 2} phi(xi_j / eps).
ComplexField illposed_data(const IllposedSpec& spec, const Grid& g);

struct InflationResult {
  std::vector<int> N;
  std::vector<double> norm;  // sup over [T/2, T] of the M^s_{2,1} norm of A d_1(|v|^{2 kappa} v)
  double slope = 0.0;
};

// One-dimensional sweep on g with J time slices over [0, T].
InflationResult norm_inflation_sweep(const IllposedSpec& base, const std::vector<int>& N_list, double T, int J,
                                     const Grid& g);

// || <x>^b F^{-1} <xi>^s F f ||_2
double weighted_sobolev_norm(const ComplexField& f, double s, double b);

struct FamilyMember {
  std::string kind;
  std::function<cplx(const double*)> fn;
};

// Gaussians, modulated Gaussians with |k| <= max_k and bumps, seeded.
std::vector<FamilyMember> embedding_family(int dim, int count, int max_k, std::uint64_t seed);

struct EmbeddingResult {
  std::vector<double> ratio;  // ||f||_{M^s_{1,1}} / ||f||_{H^{s+b,b}}
  double max_ratio = 0.0;
};

// Requires b > n/2.
EmbeddingResult embedding_sweep(const std::vector<FamilyMember>& family, const Grid& g, double s, double b,
                                const Partition& P);

}  // namespace modlab
