#pragma once

#include <array>
#include <string>
#include <vector>

#include "modlab/fields.hpp"

namespace modlab {

using LatticePoint = std::array<int, 3>;

// Standard mollifier exp(-1/(1 - x^2)) on (-1, 1), zero outside.
double bump_psi(double x);

// The smooth partition of unity on the line: eta(xi) = psi(xi) / sum_j psi(xi - j).
class Partition {
public:
  double eta(double xi) const;
  // sigma_k(xi) = prod_j eta(xi_j - k_j)
  double sigma(const LatticePoint& k, const double* xi, int dim) const;
  const std::string& construction() const { return construction_; }

  // Nonzero window samples along one axis: nodes [begin, begin + weights.size()).
  struct AxisWindow {
    int begin = 0;
    std::vector<double> weights;
  };
  AxisWindow axis_window(const Grid& g, int axis, int k) const;

private:
  std::string construction_ = "eta = psi / sum_j psi(. - j), psi(x) = exp(-1/(1-x^2)) on (-1,1)";
};

Partition build_partition();

// All lattice points with |k_a| <= grid.k_max(a) on every axis, in
// lexicographic order.
std::vector<LatticePoint> lattice(const Grid& g);
double japanese(const LatticePoint& k, int dim);  // <k> = (1 + |k|^2)^{1/2}

// Spectrum of box_k f given the spectrum of f; zero outside the window.
ComplexField box_spectrum(const LatticePoint& k, const ComplexField& fhat, const Partition& P);
// Writes sigma_k * fhat into out (overwriting it); out must be sized like fhat.
void box_spectrum_into(const LatticePoint& k, const ComplexField& fhat, const Partition& P,
                       std::vector<cplx>& out);
ComplexField box_op(const LatticePoint& k, const ComplexField& f, const Partition& P);

// Upper bound on sup_x |box_k f(x)| from the spectrum: sum |sigma_k fhat| dxi^n / (2 pi)^n.
double box_sup_bound(const LatticePoint& k, const ComplexField& fhat, const Partition& P);

// max over frequency nodes of |sum_k sigma_k(xi) - 1| for nodes inside the
// lattice's resolved band (|xi_a| <= k_max(a) + 1 - 1e-12).
double partition_defect(const Grid& g, const Partition& P);
ComplexField reconstruct(const ComplexField& f, const Partition& P);

struct NormSpec {
  double s = 0.0;
  double p = 2.0;
  double q = 1.0;
};

// (sum_k <k>^{sq} ||box_k f||_p^q)^{1/q} over the grid lattice; q = inf is a
// supremum. For p = 2 the box norms come from discrete Parseval, which is the
// same number as the spatial quadrature of the inverse transform.
double modulation_norm(const ComplexField& f, const NormSpec& spec, const Partition& P);
// Per-box L^p norms for every lattice point (same order as lattice()).
std::vector<double> box_norms(const ComplexField& f, double p, const Partition& P);

// STFT realization with the Gaussian window g(x) = exp(-|x|^2 / (2 w^2)):
// omega runs over the unit lattice inside the grid band, x over the grid.
double stft_modulation_norm(const ComplexField& f, const NormSpec& spec, double window_width = 1.0);

bool conj_box_symmetry_check(const ComplexField& f, const LatticePoint& k, const Partition& P);

// Checks that box_k of the product of box_{k^(s)} u_s vanishes whenever
// |k_a - sum_s k^(s)_a| > r + 1 on some axis. Products are formed on a grid
// refined by `padding`; padding < (r + 1) / 2 is rejected.
bool product_support_check(const LatticePoint& k, const std::vector<LatticePoint>& factors,
                           const std::vector<ComplexField>& u, const Partition& P, int padding = 0);
// Residual norm ratio behind product_support_check (for reporting).
double product_support_residual(const LatticePoint& k, const std::vector<LatticePoint>& factors,
                                const std::vector<ComplexField>& u, const Partition& P, int padding = 0);

// ||d_{x_2} box_k f||_2 / ||d_{x_1} box_k f||_2 for |k_1| >= max(|k_2|, 20), dim 2.
double direction_transfer_check(const ComplexField& f, const LatticePoint& k, const Partition& P);

}  // namespace modlab
