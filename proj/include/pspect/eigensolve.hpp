// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_EIGENSOLVE_HPP
#define PSPECT_EIGENSOLVE_HPP

#include <optional>
#include <vector>

#include "pspect/energy.hpp"
#include "pspect/grid.hpp"

namespace pspect {

// Repulsive-plus-confining potential sqrt(R) zeta_R(|x - center|) + eps |x|:
// zeta_R is 1 on B_R, 0 outside B_2R, smooth in between with |zeta_R'| <= 2/R.
struct PotentialSpec {
  double R = 1.0;
  double eps = 0.0;
  Vector2d center{0.0, 0.0};
};

// Node samples of the potential (all nodes, not only interior ones).
ArrayXd potential_values(const PotentialSpec& spec, const GridDomain2D& dom);

struct SolveOptions {
  double tol = 1e-8;       // relative stagnation of the Rayleigh value
  double tol_el = 1e-6;    // dual norm of the Euler-Lagrange defect
  int max_outer = 100000;
  int el_check_stride = 10;
};

// Present when p < 2: the descent runs on the smoothed energy with
// eps in {h, h/2} and one Richardson step in eps is reported.
struct RegularizationReport {
  double eps = 0.0;
  double lambda_eps = 0.0;
  double lambda_eps_half = 0.0;
  double lambda_extrapolated = 0.0;
  // |Lagrange multiplier - Rayleigh value| at the final iterate; the two
  // coincide only for the unsmoothed (p-homogeneous) energy.
  double multiplier_gap = 0.0;
};

template <class Domain>
struct BasicEigenResult {
  double lambda = 0.0;
  BasicGridFunction<Domain> u;   // nonnegative, unit L^p norm
  int iters = 0;
  double energy_gap = 0.0;       // energy identity defect
  double el_residual = 0.0;      // dual norm of the EL defect
  std::vector<double> lambda_trace;
  std::optional<RegularizationReport> reg;
};

using EigenResult = BasicEigenResult<GridDomain2D>;
using EigenResult1D = BasicEigenResult<GridDomain1D>;

// First Dirichlet eigenvalue by inverse power iteration: each outer step
// minimizes (1/p) * energy(v) - <|u_k|^{p-2} u_k, v> and renormalizes; the
// Rayleigh value is non-increasing across steps.
EigenResult first_eigen(DomainPtr dom, const EnergyConfig& cfg,
                        const SolveOptions& opts = {});
EigenResult first_eigen(DomainPtr dom, const EnergyConfig& cfg, double tol);
EigenResult1D first_eigen(DomainPtr1D dom, const EnergyConfig& cfg,
                          const SolveOptions& opts = {});
EigenResult1D first_eigen(DomainPtr1D dom, const EnergyConfig& cfg, double tol);

// Ground state of the weighted problem: minimizes
// dirichlet_energy + sum V |u|^p h^2 subject to unit L^p norm.
EigenResult weighted_ground_state(DomainPtr dom, const PotentialSpec& pot,
                                  const EnergyConfig& cfg,
                                  const SolveOptions& opts = {});
EigenResult weighted_ground_state(DomainPtr dom, const ArrayXd& V,
                                  const EnergyConfig& cfg,
                                  const SolveOptions& opts = {});

// The Euler-Lagrange defect -Delta_p u + (V - lambda) |u|^{p-2} u as a dual
// functional, and its dual norm.
DualFunctional el_residual_functional(const GridFunction& u, double lambda,
                                      const ArrayXd* V,
                                      const EnergyConfig& cfg);
DualFunctional1D el_residual_functional(const GridFunction1D& u, double lambda,
                                        const EnergyConfig& cfg);

double el_residual(const GridFunction& u, double lambda,
                   const std::optional<PotentialSpec>& pot,
                   const EnergyConfig& cfg);
double el_residual(const GridFunction& u, double lambda, const ArrayXd* V,
                   const EnergyConfig& cfg);
double el_residual(const GridFunction1D& u, double lambda,
                   const EnergyConfig& cfg);

} // namespace pspect

#endif
