// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_ENERGY_HPP
#define PSPECT_ENERGY_HPP

#include "pspect/grid.hpp"

namespace pspect {

// Per-cell quadrature of the gradient integrand.  corner_average evaluates
// the bilinear gradient at the four cell corners (weight h^2/4 each); it is
// exact under whole-cell translations and reflections and reduces to the
// standard 5-point stencil at p = 2.  forward_difference keeps only the
// lower-left corner (weight h^2).
enum class CellQuadrature { corner_average, forward_difference };

struct EnergyConfig {
  double p = 2.0;
  // Smoothing parameter of (eps^2 + |z|^2)^{p/2}; required for gradient
  // assembly when p < 2 and a cell gradient vanishes exactly.
  double eps_reg = 0.0;
  CellQuadrature quadrature = CellQuadrature::corner_average;
  // Inner solver knobs (dual_norm and the descent subproblems).
  double dual_tol = 1e-8;          // sup-norm of the gradient density
  int dual_max_iters = 100000;
  bool dual_force_iterative = false;  // bypass the p = 2 direct solve
};

// Linear functional phi -> sum_i coeffs_i phi_i h^d over functions vanishing
// on the pinned nodes; coefficients are zero there.
template <class Domain>
struct BasicDualFunctional {
  std::shared_ptr<const Domain> domain;
  ArrayXd coeffs;

  double operator()(const BasicGridFunction<Domain>& phi) const {
    return (coeffs * phi.values).sum() * domain->cell_measure();
  }
};

using DualFunctional = BasicDualFunctional<GridDomain2D>;
using DualFunctional1D = BasicDualFunctional<GridDomain1D>;

template <class Domain>
struct BasicDualNormResult {
  double value = 0.0;                  // operator norm = ||witness||^{p-1}
  BasicGridFunction<Domain> witness;   // maximizing direction (duality map)
  int iters = 0;
};

using DualNormResult = BasicDualNormResult<GridDomain2D>;
using DualNormResult1D = BasicDualNormResult<GridDomain1D>;

// --- integrals ---------------------------------------------------------------

// sum_cells |grad_h u|^p h^d (plain p-Dirichlet energy; ignores eps_reg).
double dirichlet_energy(const GridFunction& u, const EnergyConfig& cfg);
double dirichlet_energy(const GridFunction1D& u, const EnergyConfig& cfg);

// sum_cells ((eps^2 + |grad_h u|^2)^{p/2} - eps^p) h^d; equals the plain
// energy when eps_reg == 0.
double smoothed_dirichlet_energy(const GridFunction& u, const EnergyConfig& cfg);
double smoothed_dirichlet_energy(const GridFunction1D& u,
                                 const EnergyConfig& cfg);

// Discrete L^p norm (sum |u_i|^p h^d)^{1/p}.
double lp_norm(const GridFunction& u, double p);
double lp_norm(const GridFunction1D& u, double p);

// (dirichlet_energy + lp_norm^p)^{1/p}, the W^{1,p} norm.
double sobolev_norm(const GridFunction& u, const EnergyConfig& cfg);
double sobolev_norm(const GridFunction1D& u, const EnergyConfig& cfg);

// dirichlet_energy / lp_norm^p.  Throws DomainError on the zero function.
double rayleigh_quotient(const GridFunction& u, const EnergyConfig& cfg);
double rayleigh_quotient(const GridFunction1D& u, const EnergyConfig& cfg);

// Weak form of the (smoothed) p-Laplacian: the functional
// phi -> sum_cells (eps^2+|grad u|^2)^{(p-2)/2} <grad u, grad phi> h^d,
// i.e. the exact gradient of (1/p) * smoothed_dirichlet_energy.
DualFunctional p_laplacian_apply(const GridFunction& u, const EnergyConfig& cfg);
DualFunctional1D p_laplacian_apply(const GridFunction1D& u,
                                   const EnergyConfig& cfg);

// Dual (W^{-1,p'}) norm via the duality map: minimizes
// (1/p)(dirichlet_energy(w) + lp_norm(w)^p) - F(w); the value is
// ||w||_{W^{1,p}}^{p-1}.  At p = 2 this is one linear solve with the
// symmetric stencil.
DualNormResult dual_norm(const DualFunctional& F, const EnergyConfig& cfg);
DualNormResult1D dual_norm(const DualFunctional1D& F, const EnergyConfig& cfg);

// --- auxiliary cell sums -----------------------------------------------------

// sum_cells w(corner node) |grad_h u|^p h^d with a nodal weight field.
double weighted_dirichlet_energy(const GridFunction& u, const ArrayXd& weight,
                                 const EnergyConfig& cfg);

// sum_cells (eps^2 + |grad_h u|^2)^{(p-2)/2} (d_2 u)^2 h^d.
double gradient_x2_term(const GridFunction& u, const EnergyConfig& cfg);

// max over cells/corners of |grad_h u|.
double max_cell_gradient(const GridFunction& u, const EnergyConfig& cfg);

// Functional restricted to nodes where keep[node] != 0.
DualFunctional restrict_to(const DualFunctional& F,
                           const std::vector<std::uint8_t>& keep);

} // namespace pspect

#endif
