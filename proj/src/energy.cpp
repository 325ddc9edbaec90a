// SPDX-License-Identifier: Apache-2.0
#include "pspect/energy.hpp"

#include <cmath>

#include "pspect/solver.hpp"
#include "kernels.hpp"

namespace pspect {

namespace {

void check_p(double p) {
  if (!(p > 1.0)) throw ParameterError("exponent p must exceed 1");
}

template <class Domain>
double energy_impl(const BasicGridFunction<Domain>& u, const EnergyConfig& cfg,
                   bool smoothed) {
  check_p(cfg.p);
  const auto sums = detail::cell_pass<false>(
      *u.domain, u.values.data(), cfg.p, smoothed ? cfg.eps_reg : 0.0,
      cfg.quadrature, nullptr);
  return smoothed ? sums.smoothed : sums.plain;
}

template <class Domain>
BasicDualFunctional<Domain> apply_impl(const BasicGridFunction<Domain>& u,
                                       const EnergyConfig& cfg) {
  check_p(cfg.p);
  const Domain& dom = *u.domain;
  ArrayXd grad = ArrayXd::Zero(dom.num_nodes());
  detail::cell_pass<true>(dom, u.values.data(), cfg.p, cfg.eps_reg,
                          cfg.quadrature, grad.data());
  // Convert nodal derivatives to densities and drop the pinned nodes (test
  // functions vanish there).
  const double inv_meas = 1.0 / dom.cell_measure();
  ArrayXd coeffs = ArrayXd::Zero(dom.num_nodes());
  for (Index id : dom.dof_nodes()) coeffs[id] = grad[id] * inv_meas;
  return {u.domain, std::move(coeffs)};
}

template <class Domain>
double lp_impl(const BasicGridFunction<Domain>& u, double p) {
  check_p(p);
  return std::pow(detail::lp_pow_sum(*u.domain, u.values.data(), p), 1.0 / p);
}

template <class Domain>
double rayleigh_impl(const BasicGridFunction<Domain>& u,
                     const EnergyConfig& cfg) {
  const double m = lp_impl(u, cfg.p);
  if (m == 0.0)
    throw DomainError("rayleigh_quotient: zero function");
  return energy_impl(u, cfg, false) / std::pow(m, cfg.p);
}

template <class Domain>
double sobolev_impl(const BasicGridFunction<Domain>& u,
                    const EnergyConfig& cfg) {
  const double e = energy_impl(u, cfg, false);
  const double m = detail::lp_pow_sum(*u.domain, u.values.data(), cfg.p);
  return std::pow(e + m, 1.0 / cfg.p);
}

template <class Domain>
BasicDualNormResult<Domain> dual_norm_with(const BasicDualFunctional<Domain>& F,
                                           const EnergyConfig& cfg,
                                           const SpdSolver& K) {
  check_p(cfg.p);
  const Domain& dom = *F.domain;
  BasicDualNormResult<Domain> out;
  out.witness = BasicGridFunction<Domain>(F.domain);
  if (F.coeffs.abs().maxCoeff() == 0.0) return out;

  EnergyConfig ecfg = cfg;
  if (ecfg.p < 2.0 && ecfg.eps_reg == 0.0) ecfg.eps_reg = dom.spacing();

  if (cfg.p == 2.0 && !cfg.dual_force_iterative) {
    const VectorXd rhs = gather_dofs(dom, F.coeffs) * dom.cell_measure();
    const VectorXd w = K.solve(rhs);
    scatter_dofs(dom, w, out.witness.values);
    out.iters = 1;
  } else {
    PMinOptions opts;
    opts.grad_tol = cfg.dual_tol;
    opts.max_iters = cfg.dual_max_iters;
    PMinResult res = minimize_p_functional(dom, ecfg, nullptr, 1.0, F.coeffs,
                                           nullptr, K, opts);
    if (!res.converged)
      throw SolverError("dual_norm: descent did not converge", 0.0,
                        res.grad_sup, res.iters,
                        std::make_shared<const ArrayXd>(res.node_values));
    out.witness.values = std::move(res.node_values);
    out.iters = res.iters;
  }
  const double e = energy_impl(out.witness, cfg, false);
  const double m =
      detail::lp_pow_sum(dom, out.witness.values.data(), cfg.p);
  out.value = std::pow(e + m, (cfg.p - 1.0) / cfg.p);
  return out;
}

template <class Domain>
BasicDualNormResult<Domain> dual_norm_impl(const BasicDualFunctional<Domain>& F,
                                           const EnergyConfig& cfg) {
  check_p(cfg.p);
  if (F.coeffs.abs().maxCoeff() == 0.0) {
    BasicDualNormResult<Domain> out;
    out.witness = BasicGridFunction<Domain>(F.domain);
    return out;
  }
  SpdSolver K(sobolev_matrix(*F.domain, cfg.quadrature));
  return dual_norm_with(F, cfg, K);
}

} // namespace

double dirichlet_energy(const GridFunction& u, const EnergyConfig& cfg) {
  return energy_impl(u, cfg, false);
}
double dirichlet_energy(const GridFunction1D& u, const EnergyConfig& cfg) {
  return energy_impl(u, cfg, false);
}
double smoothed_dirichlet_energy(const GridFunction& u,
                                 const EnergyConfig& cfg) {
  return energy_impl(u, cfg, true);
}
double smoothed_dirichlet_energy(const GridFunction1D& u,
                                 const EnergyConfig& cfg) {
  return energy_impl(u, cfg, true);
}

double lp_norm(const GridFunction& u, double p) { return lp_impl(u, p); }
double lp_norm(const GridFunction1D& u, double p) { return lp_impl(u, p); }

double sobolev_norm(const GridFunction& u, const EnergyConfig& cfg) {
  return sobolev_impl(u, cfg);
}
double sobolev_norm(const GridFunction1D& u, const EnergyConfig& cfg) {
  return sobolev_impl(u, cfg);
}

double rayleigh_quotient(const GridFunction& u, const EnergyConfig& cfg) {
  return rayleigh_impl(u, cfg);
}
double rayleigh_quotient(const GridFunction1D& u, const EnergyConfig& cfg) {
  return rayleigh_impl(u, cfg);
}

DualFunctional p_laplacian_apply(const GridFunction& u,
                                 const EnergyConfig& cfg) {
  return apply_impl(u, cfg);
}
DualFunctional1D p_laplacian_apply(const GridFunction1D& u,
                                   const EnergyConfig& cfg) {
  return apply_impl(u, cfg);
}

DualNormResult dual_norm(const DualFunctional& F, const EnergyConfig& cfg) {
  return dual_norm_impl(F, cfg);
}
DualNormResult1D dual_norm(const DualFunctional1D& F, const EnergyConfig& cfg) {
  return dual_norm_impl(F, cfg);
}

DualNormResult dual_norm_precond(const DualFunctional& F,
                                 const EnergyConfig& cfg, const SpdSolver& K) {
  return dual_norm_with(F, cfg, K);
}
DualNormResult1D dual_norm_precond(const DualFunctional1D& F,
                                   const EnergyConfig& cfg,
                                   const SpdSolver& K) {
  return dual_norm_with(F, cfg, K);
}

double weighted_dirichlet_energy(const GridFunction& u, const ArrayXd& weight,
                                 const EnergyConfig& cfg) {
  check_p(cfg.p);
  const GridDomain2D& dom = *u.domain;
  const double* v = u.values.data();
  const double* wt = weight.data();
  const double inv_h = 1.0 / dom.spacing();
  const double p = cfg.p;
  detail::ChunkSum acc;
  if (cfg.quadrature == CellQuadrature::corner_average) {
    const double w = 0.25 * dom.cell_measure();
    for (const auto& c : dom.active_cells()) {
      const double dxb = (v[c.r] - v[c.b]) * inv_h;
      const double dxt = (v[c.d] - v[c.t]) * inv_h;
      const double dyl = (v[c.t] - v[c.b]) * inv_h;
      const double dyr = (v[c.d] - v[c.r]) * inv_h;
      acc.add(w * (wt[c.b] * detail::pow_half(dxb * dxb + dyl * dyl, p) +
                   wt[c.r] * detail::pow_half(dxb * dxb + dyr * dyr, p) +
                   wt[c.t] * detail::pow_half(dxt * dxt + dyl * dyl, p) +
                   wt[c.d] * detail::pow_half(dxt * dxt + dyr * dyr, p)));
    }
  } else {
    const double w = dom.cell_measure();
    for (const auto& c : dom.active_cells()) {
      const double dx = (v[c.r] - v[c.b]) * inv_h;
      const double dy = (v[c.t] - v[c.b]) * inv_h;
      acc.add(w * wt[c.b] * detail::pow_half(dx * dx + dy * dy, p));
    }
  }
  return acc.value();
}

double gradient_x2_term(const GridFunction& u, const EnergyConfig& cfg) {
  check_p(cfg.p);
  const GridDomain2D& dom = *u.domain;
  const double* v = u.values.data();
  const double inv_h = 1.0 / dom.spacing();
  const double p = cfg.p;
  const double e2 = cfg.eps_reg * cfg.eps_reg;
  detail::ChunkSum acc;
  const auto term = [&](double s, double dy) {
    const double d2 = dy * dy;
    if (d2 == 0.0) return 0.0;
    return detail::pow_weight(e2 + s, p) * d2;
  };
  if (cfg.quadrature == CellQuadrature::corner_average) {
    const double w = 0.25 * dom.cell_measure();
    for (const auto& c : dom.active_cells()) {
      const double dxb = (v[c.r] - v[c.b]) * inv_h;
      const double dxt = (v[c.d] - v[c.t]) * inv_h;
      const double dyl = (v[c.t] - v[c.b]) * inv_h;
      const double dyr = (v[c.d] - v[c.r]) * inv_h;
      acc.add(w * (term(dxb * dxb + dyl * dyl, dyl) +
                   term(dxb * dxb + dyr * dyr, dyr) +
                   term(dxt * dxt + dyl * dyl, dyl) +
                   term(dxt * dxt + dyr * dyr, dyr)));
    }
  } else {
    const double w = dom.cell_measure();
    for (const auto& c : dom.active_cells()) {
      const double dx = (v[c.r] - v[c.b]) * inv_h;
      const double dy = (v[c.t] - v[c.b]) * inv_h;
      acc.add(w * term(dx * dx + dy * dy, dy));
    }
  }
  return acc.value();
}

double max_cell_gradient(const GridFunction& u, const EnergyConfig& cfg) {
  const GridDomain2D& dom = *u.domain;
  const double* v = u.values.data();
  const double inv_h = 1.0 / dom.spacing();
  double s_max = 0.0;
  for (const auto& c : dom.active_cells()) {
    const double dxb = (v[c.r] - v[c.b]) * inv_h;
    const double dxt = (v[c.d] - v[c.t]) * inv_h;
    const double dyl = (v[c.t] - v[c.b]) * inv_h;
    const double dyr = (v[c.d] - v[c.r]) * inv_h;
    if (cfg.quadrature == CellQuadrature::corner_average) {
      s_max = std::max({s_max, dxb * dxb + dyl * dyl, dxb * dxb + dyr * dyr,
                        dxt * dxt + dyl * dyl, dxt * dxt + dyr * dyr});
    } else {
      s_max = std::max(s_max, dxb * dxb + dyl * dyl);
    }
  }
  return std::sqrt(s_max);
}

DualFunctional restrict_to(const DualFunctional& F,
                           const std::vector<std::uint8_t>& keep) {
  if (static_cast<Index>(keep.size()) != F.domain->num_nodes())
    throw ParameterError("restrict_to: predicate size mismatch");
  ArrayXd coeffs = F.coeffs;
  for (Index id = 0; id < coeffs.size(); ++id)
    if (!keep[id]) coeffs[id] = 0.0;
  return {F.domain, std::move(coeffs)};
}

} // namespace pspect
