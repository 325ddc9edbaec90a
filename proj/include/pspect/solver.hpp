// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_SOLVER_HPP
#define PSPECT_SOLVER_HPP

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <memory>

#include "pspect/energy.hpp"
#include "pspect/grid.hpp"

namespace pspect {

using SparseMat = Eigen::SparseMatrix<double>;

// Sparse SPD factorization wrapper (LDLT), shareable across threads once
// built.
class SpdSolver {
 public:
  explicit SpdSolver(SparseMat A);
  VectorXd solve(const VectorXd& rhs) const;
  const SparseMat& matrix() const { return A_; }

 private:
  SparseMat A_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMat>> ldlt_;
};

// p = 2 stiffness matrix on interior DOFs for the given quadrature; the exact
// Jacobian of the discrete Dirichlet form at p = 2.
SparseMat p2_stiffness_matrix(const GridDomain2D& dom, CellQuadrature quad);
SparseMat p2_stiffness_matrix(const GridDomain1D& dom, CellQuadrature quad);

// W^{1,2} Gram matrix: stiffness + h^d * identity.
SparseMat sobolev_matrix(const GridDomain2D& dom, CellQuadrature quad);
SparseMat sobolev_matrix(const GridDomain1D& dom, CellQuadrature quad);

VectorXd gather_dofs(const GridDomain2D& dom, const ArrayXd& nodes);
VectorXd gather_dofs(const GridDomain1D& dom, const ArrayXd& nodes);
void scatter_dofs(const GridDomain2D& dom, const VectorXd& dofs,
                  ArrayXd& nodes);
void scatter_dofs(const GridDomain1D& dom, const VectorXd& dofs,
                  ArrayXd& nodes);

struct PMinOptions {
  double grad_tol = 1e-8;   // sup-norm of the gradient density
  int max_iters = 100000;
  int memory = 10;
};

struct PMinResult {
  ArrayXd node_values;
  int iters = 0;
  double grad_sup = 0.0;
  bool converged = false;
};

// Minimizes, over functions vanishing on pinned nodes,
//   G(v) = (1/p) [ smoothed_dirichlet_energy(v)
//                  + sum_i (V_i + mass_coeff) |v_i|^p h^d ]
//          - sum_i f_i v_i h^d,
// by L-BFGS preconditioned with the W^{1,2} Gram matrix K.
PMinResult minimize_p_functional(const GridDomain2D& dom,
                                 const EnergyConfig& cfg, const ArrayXd* V,
                                 double mass_coeff, const ArrayXd& f_density,
                                 const ArrayXd* warm_start, const SpdSolver& K,
                                 const PMinOptions& opts);
PMinResult minimize_p_functional(const GridDomain1D& dom,
                                 const EnergyConfig& cfg, const ArrayXd* V,
                                 double mass_coeff, const ArrayXd& f_density,
                                 const ArrayXd* warm_start, const SpdSolver& K,
                                 const PMinOptions& opts);

// dual_norm with a caller-provided Gram factorization (reused across calls
// on the same grid).
DualNormResult dual_norm_precond(const DualFunctional& F,
                                 const EnergyConfig& cfg, const SpdSolver& K);
DualNormResult1D dual_norm_precond(const DualFunctional1D& F,
                                   const EnergyConfig& cfg, const SpdSolver& K);

} // namespace pspect

#endif
