#pragma once

#include "modlab/fields.hpp"
#include "modlab/gabor.hpp"

namespace modlab {

// Global time-orientation of the free group. +1 (default) realizes
// S(t) = F^{-1} e^{+it|xi|^2_pm} F, -1 realizes e^{-it|xi|^2_pm}. Both the
// spectral and the closed-form atom realization read this flag.
int time_sign();
void set_time_sign(int sign);

// Multiplies a centered spectrum by e^{i s t |xi|^2_pm} in place.
void propagate_spectrum_inplace(const Grid& g, std::vector<cplx>& fhat, double t, const Signature& eps);
ComplexField propagate_spectral(const ComplexField& f, double t, const Signature& eps);

// Closed-form free evolution of gauss_atom(k, l).
ComplexField atom_evolution(const LatticePoint& k, const LatticePoint& l, double t, const Signature& eps,
                            const Grid& g);
ComplexField propagate_gabor(const FrameCoefficients& c, double t, const Signature& eps, const Grid& g);

// Slices S(t_j) u0 at t_j = j T / J, j = 0 .. J.
SpaceTimeField free_evolution(const ComplexField& u0, double T, int J, const Signature& eps);

// (A F)(t_j) = int_{t_0}^{t_j} S(t_j - tau) F(tau) dtau by the trapezoid rule.
// Accumulated in frequency as S(t_j) sum_i w_i S(-tau_i) F(tau_i).
SpaceTimeField duhamel(const SpaceTimeField& F, const Signature& eps);

// Exact A F(t) for a time-independent forcing F(tau) = h on [0, t]:
// F^{-1}[(e^{i t w} - 1)/(i w) h^], w = s |xi|^2_pm.
ComplexField duhamel_constant_profile(const ComplexField& h, double t, const Signature& eps);

}  // namespace modlab
