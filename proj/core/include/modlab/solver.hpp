#pragma once

#include <array>
#include <string>
#include <vector>

#include "modlab/fields.hpp"
#include "modlab/freqdecomp.hpp"
#include "modlab/seminorms.hpp"

namespace modlab {

// i u_t - Delta_pm u = F(u) with one of three nonlinearities:
//   power-derivative  F = lambda . grad(|u|^{2 kappa} u) + mu |u|^{2 nu} u
//   power             F = mu |u|^{2 nu} u
//   schrodinger-map   F = 2 conj(u) / (1 + |u|^2) sum_j eps_j (d_j u)^2
enum class NonlinearityKind { PowerDerivative, Power, SchrodingerMap };

NonlinearityKind parse_nonlinearity(const std::string& name);
std::string nonlinearity_name(NonlinearityKind kind);

struct SolverParams {
  Signature eps;
  NonlinearityKind kind = NonlinearityKind::PowerDerivative;
  std::array<cplx, 3> lambda{};
  int kappa = 1;
  cplx mu{};
  int nu = 1;
  double dt = 1e-3;
  double T = 1.0;
  double padding = 2.0;  // product grid = padding x the field grid per axis

  // Minimum padding that removes aliasing from the polynomial products.
  double required_padding() const;
  int steps() const;
  void validate(const Grid& g) const;
};

// Sup-norm beyond which a field is treated as blown up.
inline constexpr double kBlowupThreshold = 1e6;

// Samples of F(u). Throws NumericalError when |u| exceeds the blow-up
// threshold or is not finite.
ComplexField nonlinearity_eval(const ComplexField& u, const SolverParams& p);

// One Strang step: half a linear step, an explicit midpoint step of
// u_t = -i F(u), half a linear step.
ComplexField strang_step(const ComplexField& u, const SolverParams& p);

struct EvolveOptions {
  int snapshots = 32;                 // stored slices besides t = 0
  std::vector<SeminormId> trace_ids;  // empty: the X-space ids for 2 kappa
  bool compare_free = true;
};

struct Evolution {
  SpaceTimeField u;
  SeminormTrace trace;
  SeminormTrace free_trace;             // same ids over the free flow S(t) u0
  std::vector<double> growth;           // max over windows of trace / free_trace, per id
};

// Throws NumericalError naming the time at which blow-up was detected.
Evolution evolve(const ComplexField& u0, const SolverParams& p, const Partition& P, const EvolveOptions& opts = {});

// Ids of the metric space used for contraction: Y in 2D, its 1D analogue in
// 1D, X^{1/2 kappa} otherwise.
std::vector<SeminormId> contraction_ids(int dim, int kappa);

// sum over alpha in {0, 1} and axes of the composite norm of d^alpha_{x_i} u.
double contraction_metric(const SpaceTimeField& u, const std::vector<SeminormId>& ids, const Partition& P);

struct PicardTrace {
  std::vector<int> iterate;        // m = 1 .. for d(u_m, u_{m-1})
  std::vector<double> distance;
  std::vector<double> ratio;       // distance[m] / distance[m-1]
  bool diverged = false;
};

// Iterates T u = S(t) u0 - i A F(u) on J + 1 slices over [0, window],
// starting from u_0 = S(t) u0. Divergence (ratio > 2 twice in a row) stops
// the iteration and is reported through the trace.
PicardTrace picard_iterate(const ComplexField& u0, const SolverParams& p, int n_iter, double window, int slices,
                           const Partition& P);

// Space-time field of the Duhamel term A F(S(t) u0), used by the first
// Picard step.
SpaceTimeField first_iterate_term(const ComplexField& u0, const SolverParams& p, double window, int slices);

}  // namespace modlab
