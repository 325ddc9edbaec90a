// SPDX-License-Identifier: Apache-2.0
#include "pspect/eigensolve.hpp"

#include <cmath>

#include "pspect/solver.hpp"
#include "kernels.hpp"

namespace pspect {

ArrayXd potential_values(const PotentialSpec& spec, const GridDomain2D& dom) {
  if (!(spec.R > 0.0))
    throw ParameterError("PotentialSpec: R must be positive");
  if (spec.eps < 0.0)
    throw ParameterError("PotentialSpec: eps must be nonnegative");
  const double R = spec.R;
  const double sqrtR = std::sqrt(R);
  ArrayXd V(dom.num_nodes());
  for (Index id = 0; id < dom.num_nodes(); ++id) {
    const double r = std::sqrt(dom.radius2(id, spec.center));
    double zeta;
    if (r <= R) {
      zeta = 1.0;
    } else if (r >= 2.0 * R) {
      zeta = 0.0;
    } else {
      const double t = (r - R) / R;
      zeta = 1.0 - t * t * (3.0 - 2.0 * t);  // C^1 ramp, |zeta'| <= 1.5/R
    }
    V[id] = sqrtR * zeta + spec.eps * r;
  }
  return V;
}

namespace {

// Deterministic positive start: product of parabolas over the index bounding
// box of the interior mask (covariant under whole-cell translations).
ArrayXd init_bump(const GridDomain2D& dom) {
  const auto& bb = dom.interior_bbox();
  const double ci = 0.5 * static_cast<double>(bb[0] + bb[1]);
  const double cj = 0.5 * static_cast<double>(bb[2] + bb[3]);
  const double ri = 0.5 * static_cast<double>(bb[1] - bb[0]) + 1.0;
  const double rj = 0.5 * static_cast<double>(bb[3] - bb[2]) + 1.0;
  ArrayXd u = ArrayXd::Zero(dom.num_nodes());
  for (Index id : dom.dof_nodes()) {
    const Index i = id % dom.nx(), j = id / dom.nx();
    const double xi = (static_cast<double>(i) - ci) / ri;
    const double eta = (static_cast<double>(j) - cj) / rj;
    u[id] = (1.0 - xi * xi) * (1.0 - eta * eta);
  }
  return u;
}

ArrayXd init_bump(const GridDomain1D& dom) {
  const auto& bb = dom.interior_bbox();
  const double ci = 0.5 * static_cast<double>(bb[0] + bb[1]);
  const double ri = 0.5 * static_cast<double>(bb[1] - bb[0]) + 1.0;
  ArrayXd u = ArrayXd::Zero(dom.num_nodes());
  for (Index id : dom.dof_nodes()) {
    const double xi = (static_cast<double>(id) - ci) / ri;
    u[id] = 1.0 - xi * xi;
  }
  return u;
}

template <class Domain>
double potential_term(const Domain& dom, const ArrayXd& u, const ArrayXd* V,
                      double p) {
  if (!V) return 0.0;
  detail::ChunkSum s;
  for (Index id : dom.dof_nodes())
    s.add((*V)[id] * detail::abs_pow(u[id], p));
  return s.value() * dom.cell_measure();
}

// Zero-order term as the descent subproblems see it (smoothed when p < 2).
template <class Domain>
double potential_term_smoothed(const Domain& dom, const ArrayXd& u,
                               const ArrayXd* V, const EnergyConfig& cfg) {
  if (!V) return 0.0;
  if (!(cfg.p < 2.0 && cfg.eps_reg > 0.0))
    return potential_term(dom, u, V, cfg.p);
  const double e2 = cfg.eps_reg * cfg.eps_reg;
  const double emp = detail::pow_half(e2, cfg.p);
  detail::ChunkSum s;
  for (Index id : dom.dof_nodes())
    s.add((*V)[id] * (detail::pow_half(e2 + u[id] * u[id], cfg.p) - emp));
  return s.value() * dom.cell_measure();
}

template <class Domain>
BasicDualFunctional<Domain> residual_functional_impl(
    const BasicGridFunction<Domain>& u, double lambda, const ArrayXd* V,
    const EnergyConfig& cfg) {
  BasicDualFunctional<Domain> F = p_laplacian_apply(u, cfg);
  const Domain& dom = *u.domain;
  for (Index id : dom.dof_nodes()) {
    const double c = (V ? (*V)[id] : 0.0) - lambda;
    F.coeffs[id] += c * detail::signed_pow(u.values[id], cfg.p);
  }
  return F;
}

struct IterOutcome {
  ArrayXd u;
  double lambda_plain = 0.0;
  double multiplier = 0.0;
  double el = 0.0;
  int iters = 0;
  std::vector<double> trace;
};

// One inverse-power run at a fixed smoothing parameter.
template <class Domain>
IterOutcome power_iterate(std::shared_ptr<const Domain> dom_ptr,
                          const ArrayXd* V, const EnergyConfig& cfg,
                          const SolveOptions& opts, const ArrayXd* start) {
  const Domain& dom = *dom_ptr;
  const double p = cfg.p;
  const double meas = dom.cell_measure();

  BasicGridFunction<Domain> u(dom_ptr);
  u.values = start ? *start : init_bump(dom);
  {
    const double n0 = std::pow(
        detail::lp_pow_sum(dom, u.values.data(), p), 1.0 / p);
    if (n0 == 0.0)
      throw SolverError("eigensolve: zero start", 0.0, 0.0, 0);
    u.values /= n0;
  }

  const bool direct = (p == 2.0);
  std::optional<SpdSolver> AV;
  std::optional<SpdSolver> K;
  if (direct) {
    SparseMat A = p2_stiffness_matrix(dom, cfg.quadrature);
    if (V) {
      const VectorXd vd = gather_dofs(dom, *V);
      SparseMat D(A.rows(), A.cols());
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(static_cast<std::size_t>(A.rows()));
      for (Index k = 0; k < A.rows(); ++k)
        trip.emplace_back(k, k, vd[k] * meas);
      D.setFromTriplets(trip.begin(), trip.end());
      A = A + D;
    }
    AV.emplace(std::move(A));
  }
  K.emplace(sobolev_matrix(dom, cfg.quadrature));

  const auto objective = [&](const ArrayXd& vals) {
    const auto sums = detail::cell_pass<false>(dom, vals.data(), p,
                                               cfg.eps_reg, cfg.quadrature,
                                               nullptr);
    return sums.smoothed + potential_term_smoothed(dom, vals, V, cfg);
  };
  const auto plain_value = [&](const ArrayXd& vals) {
    const auto sums = detail::cell_pass<false>(dom, vals.data(), p, 0.0,
                                               cfg.quadrature, nullptr);
    return sums.plain + potential_term(dom, vals, V, p);
  };
  const auto dual_residual_at = [&](const BasicGridFunction<Domain>& w,
                                    double level) {
    auto F = residual_functional_impl(w, level, V, cfg);
    if (direct && !cfg.dual_force_iterative) {
      const VectorXd rhs = gather_dofs(dom, F.coeffs) * meas;
      BasicGridFunction<Domain> wit(dom_ptr);
      scatter_dofs(dom, K->solve(rhs), wit.values);
      const double e = dirichlet_energy(wit, cfg);
      const double m = detail::lp_pow_sum(dom, wit.values.data(), p);
      return std::sqrt(e + m);
    }
    return dual_norm_precond(F, cfg, *K).value;
  };

  IterOutcome out;
  double lam_s = objective(u.values);
  out.trace.push_back(plain_value(u.values));
  ArrayXd f(dom.num_nodes());
  int next_el_check = 0;
  bool done = false;
  int it = 0;
  for (; it < opts.max_outer && !done; ++it) {
    for (Index id = 0; id < f.size(); ++id)
      f[id] = detail::signed_pow(u.values[id], p);

    ArrayXd w_nodes;
    if (direct) {
      const VectorXd rhs = gather_dofs(dom, f) * meas;
      w_nodes = ArrayXd::Zero(dom.num_nodes());
      scatter_dofs(dom, AV->solve(rhs), w_nodes);
    } else {
      const double scale =
          std::pow(std::max(lam_s, 1e-12), -1.0 / (p - 1.0));
      const ArrayXd warm = u.values * scale;
      PMinOptions popts;
      popts.grad_tol = cfg.dual_tol;
      popts.max_iters = cfg.dual_max_iters;
      PMinResult res =
          minimize_p_functional(dom, cfg, V, 0.0, f, &warm, *K, popts);
      if (!res.converged)
        throw SolverError("eigensolve: inner minimization stalled", lam_s,
                          res.grad_sup, it,
                          std::make_shared<const ArrayXd>(res.node_values));
      w_nodes = std::move(res.node_values);
    }

    const double wn =
        std::pow(detail::lp_pow_sum(dom, w_nodes.data(), p), 1.0 / p);
    if (!(wn > 0.0))
      throw SolverError("eigensolve: inner step returned zero", lam_s, 0.0,
                        it);
    u.values = w_nodes / wn;

    const double lam_next = objective(u.values);
    out.trace.push_back(plain_value(u.values));
    if (lam_next > lam_s + 10.0 * opts.tol * std::max(1.0, std::abs(lam_s)))
      throw SolverError("eigensolve: Rayleigh value increased", lam_next,
                        lam_next - lam_s, it,
                        std::make_shared<const ArrayXd>(u.values));
    const bool lam_stable =
        std::abs(lam_next - lam_s) <
        opts.tol * std::max(1.0, std::abs(lam_next));
    lam_s = lam_next;

    if (lam_stable && it >= next_el_check) {
      auto FA = p_laplacian_apply(u, cfg);
      out.multiplier = FA(u) + potential_term(dom, u.values, V, p);
      out.el = dual_residual_at(u, out.multiplier);
      if (out.el <= opts.tol_el)
        done = true;
      else
        next_el_check = it + opts.el_check_stride;
    }
  }
  if (!done)
    throw SolverError("eigensolve: no convergence within max_outer", lam_s,
                      out.el, it, std::make_shared<const ArrayXd>(u.values));

  if (u.values.sum() < 0.0) u.values = -u.values;
  out.u = u.values;
  out.lambda_plain = plain_value(u.values);
  out.iters = it;
  return out;
}

template <class Domain>
BasicEigenResult<Domain> solve_impl(std::shared_ptr<const Domain> dom_ptr,
                                    const ArrayXd* V, EnergyConfig cfg,
                                    const SolveOptions& opts) {
  if (!(cfg.p > 1.0)) throw ParameterError("eigensolve: p must exceed 1");
  if (!(opts.tol > 0.0)) throw ParameterError("eigensolve: tol must be positive");
  if (V && V->size() != dom_ptr->num_nodes())
    throw ParameterError("eigensolve: potential size mismatch");

  BasicEigenResult<Domain> out;
  IterOutcome final;
  if (cfg.p < 2.0) {
    const double h = dom_ptr->spacing();
    EnergyConfig c1 = cfg;
    if (c1.eps_reg == 0.0) c1.eps_reg = h;
    IterOutcome pass1 = power_iterate(dom_ptr, V, c1, opts, nullptr);
    EnergyConfig c2 = cfg;
    c2.eps_reg = 0.5 * c1.eps_reg;
    final = power_iterate(dom_ptr, V, c2, opts, &pass1.u);
    RegularizationReport rep;
    rep.eps = c2.eps_reg;
    rep.lambda_eps = pass1.lambda_plain;
    rep.lambda_eps_half = final.lambda_plain;
    rep.lambda_extrapolated = 2.0 * final.lambda_plain - pass1.lambda_plain;
    rep.multiplier_gap = std::abs(final.multiplier - final.lambda_plain);
    out.reg = rep;
    out.iters = pass1.iters + final.iters;
  } else {
    final = power_iterate(dom_ptr, V, cfg, opts, nullptr);
    out.iters = final.iters;
  }

  out.u = BasicGridFunction<Domain>(dom_ptr, std::move(final.u));
  out.lambda = final.lambda_plain;
  out.el_residual = final.el;
  out.lambda_trace = std::move(final.trace);
  // Energy identity check: recompute both sides from the returned function.
  {
    const double e = dirichlet_energy(out.u, cfg);
    const double vterm = potential_term(*dom_ptr, out.u.values, V, cfg.p);
    const double np = detail::lp_pow_sum(*dom_ptr, out.u.values.data(), cfg.p);
    out.energy_gap = std::abs(out.lambda - (e + vterm));
    if (std::abs(np - 1.0) > 1e-10)
      throw SolverError("eigensolve: normalization drift", out.lambda,
                        std::abs(np - 1.0), out.iters);
  }
  return out;
}

} // namespace

EigenResult first_eigen(DomainPtr dom, const EnergyConfig& cfg,
                        const SolveOptions& opts) {
  return solve_impl<GridDomain2D>(std::move(dom), nullptr, cfg, opts);
}
EigenResult first_eigen(DomainPtr dom, const EnergyConfig& cfg, double tol) {
  SolveOptions opts;
  opts.tol = tol;
  return first_eigen(std::move(dom), cfg, opts);
}
EigenResult1D first_eigen(DomainPtr1D dom, const EnergyConfig& cfg,
                          const SolveOptions& opts) {
  return solve_impl<GridDomain1D>(std::move(dom), nullptr, cfg, opts);
}
EigenResult1D first_eigen(DomainPtr1D dom, const EnergyConfig& cfg,
                          double tol) {
  SolveOptions opts;
  opts.tol = tol;
  return first_eigen(std::move(dom), cfg, opts);
}

EigenResult weighted_ground_state(DomainPtr dom, const PotentialSpec& pot,
                                  const EnergyConfig& cfg,
                                  const SolveOptions& opts) {
  const ArrayXd V = potential_values(pot, *dom);
  return solve_impl<GridDomain2D>(std::move(dom), &V, cfg, opts);
}
EigenResult weighted_ground_state(DomainPtr dom, const ArrayXd& V,
                                  const EnergyConfig& cfg,
                                  const SolveOptions& opts) {
  return solve_impl<GridDomain2D>(std::move(dom), &V, cfg, opts);
}

DualFunctional el_residual_functional(const GridFunction& u, double lambda,
                                      const ArrayXd* V,
                                      const EnergyConfig& cfg) {
  return residual_functional_impl(u, lambda, V, cfg);
}
DualFunctional1D el_residual_functional(const GridFunction1D& u, double lambda,
                                        const EnergyConfig& cfg) {
  return residual_functional_impl(u, lambda, nullptr, cfg);
}

double el_residual(const GridFunction& u, double lambda, const ArrayXd* V,
                   const EnergyConfig& cfg) {
  if (lp_norm(u, cfg.p) == 0.0)
    throw DomainError("el_residual: zero function");
  return dual_norm(residual_functional_impl(u, lambda, V, cfg), cfg).value;
}
double el_residual(const GridFunction& u, double lambda,
                   const std::optional<PotentialSpec>& pot,
                   const EnergyConfig& cfg) {
  if (!pot) return el_residual(u, lambda, static_cast<const ArrayXd*>(nullptr), cfg);
  const ArrayXd V = potential_values(*pot, *u.domain);
  return el_residual(u, lambda, &V, cfg);
}
double el_residual(const GridFunction1D& u, double lambda,
                   const EnergyConfig& cfg) {
  if (lp_norm(u, cfg.p) == 0.0)
    throw DomainError("el_residual: zero function");
  return dual_norm(residual_functional_impl(u, lambda, nullptr, cfg), cfg)
      .value;
}

} // namespace pspect
