// SPDX-License-Identifier: Apache-2.0
#include "pspect/weyl2.hpp"

#include <cmath>

#include "pspect/solver.hpp"

namespace pspect {

WeylCorrection weyl_correct(const GridFunction& u, double lambda,
                            const EnergyConfig& cfg) {
  if (cfg.p != 2.0)
    throw UnsupportedExponentError("weyl_correct: only p = 2 is supported");
  if (std::abs(lp_norm(u, 2.0) - 1.0) > 1e-6)
    throw ParameterError("weyl_correct: input must have unit L^2 norm");

  const GridDomain2D& dom = *u.domain;
  WeylCorrection out;
  out.h_n = el_residual_functional(u, lambda, nullptr, cfg);

  SpdSolver K(sobolev_matrix(dom, cfg.quadrature));
  const VectorXd rhs = gather_dofs(dom, out.h_n.coeffs) * dom.cell_measure();
  out.U_n = GridFunction(u.domain);
  scatter_dofs(dom, K.solve(rhs), out.U_n.values);
  out.dual_norm_h = sobolev_norm(out.U_n, cfg);

  GridFunction diff(u.domain, u.values - out.U_n.values);
  const double dnorm = lp_norm(diff, 2.0);
  if (dnorm < 1e-12)
    throw DegenerateInputError("weyl_correct: u - U vanishes");
  out.v_n = GridFunction(u.domain, diff.values / dnorm);
  out.strong_residual = (1.0 + lambda) * lp_norm(out.U_n, 2.0) / dnorm;

  DualFunctional Fv = el_residual_functional(out.v_n, lambda, nullptr, cfg);
  out.strong_residual_assembled =
      lp_norm(GridFunction(u.domain, Fv.coeffs), 2.0);
  return out;
}

std::pair<double, double> l2_vs_dual_check(const GridFunction& f) {
  EnergyConfig cfg;
  cfg.p = 2.0;
  const double l2 = lp_norm(f, 2.0);
  DualFunctional F{f.domain, f.values};
  const double dual = dual_norm(F, cfg).value;
  if (dual > l2 + 1e-8 * std::max(1.0, l2))
    throw SolverError("l2_vs_dual_check: dual norm exceeded the L^2 norm",
                      dual, dual - l2, 0);
  return {l2, dual};
}

} // namespace pspect
