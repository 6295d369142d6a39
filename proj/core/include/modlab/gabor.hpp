#pragma once

#include <iosfwd>
#include <vector>

#include "modlab/fields.hpp"
#include "modlab/freqdecomp.hpp"

namespace modlab {

// Index box of a truncated Gabor system: modulations |k|_inf <= K and
// translations |l|_inf <= L_rad.
struct FrameTruncation {
  int K = 0;
  int L_rad = 0;
};

// K = min_a k_max(a) - 2, L_rad = floor(min_a L_a) - 6.
FrameTruncation default_truncation(const Grid& g);

struct FrameCoefficients {
  int dim = 1;
  FrameTruncation trunc;
  std::vector<cplx> c;

  static FrameCoefficients zeros(int dim, const FrameTruncation& trunc);
  int k_side() const { return 2 * trunc.K + 1; }
  int l_side() const { return 2 * trunc.L_rad + 1; }
  std::size_t l_count() const;
  // Flat index; k-major, then l, each lexicographic.
  std::size_t index(const LatticePoint& k, const LatticePoint& l) const;
  cplx& at(const LatticePoint& k, const LatticePoint& l) { return c[index(k, l)]; }
  cplx at(const LatticePoint& k, const LatticePoint& l) const { return c[index(k, l)]; }
  LatticePoint k_of(std::size_t flat) const;
  LatticePoint l_of(std::size_t flat) const;
};

// e^{i k.x} e^{-|x - l|^2 / 2} sampled on the grid.
ComplexField gauss_atom(const LatticePoint& k, const LatticePoint& l, const Grid& g);

// Raw analysis coefficients <f, g_kl> (no frame inversion).
FrameCoefficients analysis_coefficients(const ComplexField& f, const FrameTruncation& trunc);
ComplexField synthesize(const FrameCoefficients& c, const Grid& g);

// S f = sum_{k,l} <f, g_kl> g_kl. If truncation_warning is given it is set
// when more than 1e-12 of the energy of f lies outside the region covered by
// the truncated lattice.
ComplexField frame_operator_apply(const ComplexField& f, const FrameTruncation& trunc,
                                  bool* truncation_warning = nullptr);

struct AnalyzeOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
};

// Canonical coefficients <S^{-1} f, g_kl>, with S h = f solved by conjugate
// gradients. Throws NumericalError carrying the last residual on failure.
FrameCoefficients analyze(const ComplexField& f, const FrameTruncation& trunc,
                          const AnalyzeOptions& opts = {});

struct FrameBounds {
  double A = 0.0;
  double B = 0.0;
  int subspace_dim = 0;
};

// Orthonormalized test subspace used by frame_bounds: Gaussian packets on a
// phase-space lattice of step sqrt(2 pi) inside the truncated coverage.
std::vector<ComplexField> frame_test_packets(const Grid& g, const FrameTruncation& trunc);

// Extreme Rayleigh quotients of S over the test subspace (Rayleigh-Ritz).
// Throws NumericalError when A < 1e-8 B.
FrameBounds frame_bounds(const Grid& g, const FrameTruncation& trunc);

// m^s_{p,q} sequence norm: (sum_k <k>^{sq} (sum_l |c_kl|^p)^{q/p})^{1/q}.
double coefficient_norm(const FrameCoefficients& c, const NormSpec& spec);

// Columnar text format: a header line, then one line per nonzero
// coefficient "k_1 .. k_n l_1 .. l_n re im".
void write_coefficients(std::ostream& os, const FrameCoefficients& c);
FrameCoefficients read_coefficients(std::istream& is);

}  // namespace modlab
