// SPDX-License-Identifier: Apache-2.0
#include "pspect/strip.hpp"

#include <cmath>
#include <random>

#include "pspect/fit.hpp"
#include "pspect/parallel.hpp"
#include "pspect/solver.hpp"
#include "kernels.hpp"

namespace pspect {

namespace {

EnergyConfig strip_energy_config(double p, double h) {
  EnergyConfig cfg;
  cfg.p = p;
  if (p < 2.0) cfg.eps_reg = h;
  return cfg;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

double pi_p(double p, double h) {
  if (!(p > 1.0)) throw ParameterError("pi_p: p must exceed 1");
  const auto lam_at = [&](double hh) {
    EnergyConfig cfg = strip_energy_config(p, hh);
    return first_eigen(make_interval(0.5, hh), cfg, SolveOptions{}).lambda;
  };
  const double l1 = lam_at(h);
  const double l2 = lam_at(0.5 * h);
  const double lam = (4.0 * l2 - l1) / 3.0;
  return std::pow(lam, 1.0 / p);
}

std::vector<std::pair<double, double>> lambda_curve(
    double alpha, double p, const std::vector<double>& T_list, double h,
    const SolveOptions& opts, int jobs) {
  for (std::size_t k = 0; k + 1 < T_list.size(); ++k)
    if (!(T_list[k] < T_list[k + 1]))
      throw ParameterError("lambda_curve: T list must be increasing");
  std::vector<std::pair<double, double>> out(T_list.size());
  const EnergyConfig cfg = strip_energy_config(p, h);
  parallel_for(static_cast<Index>(T_list.size()), jobs, [&](Index i) {
    const double T = T_list[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = {
        T, first_eigen(make_rectangle(alpha, T, h), cfg, opts).lambda};
  });
  return out;
}

double find_T(double alpha, double p, double lambda_target, double h,
              double tol) {
  if (!(alpha > 0.0) || !(h > 0.0) || !(tol > 0.0))
    throw ParameterError("find_T: alpha, h, tol must be positive");
  const double threshold = std::pow(pi_p(p, h) / (2.0 * alpha), p);
  if (!(lambda_target > threshold * 1.01))
    throw DomainError("find_T: target " + std::to_string(lambda_target) +
                      " is not above the section threshold " +
                      std::to_string(threshold));

  const EnergyConfig cfg = strip_energy_config(p, h);
  const SolveOptions opts{};
  const auto lam_at = [&](double T) {
    return first_eigen(make_rectangle(alpha, T, h), cfg, opts).lambda;
  };

  double T_lo = alpha, T_hi = alpha;
  double lam_lo = lam_at(T_lo);
  // lam(T_lo) must exceed the target (blow-up as T -> 0).
  for (int k = 0; lam_lo <= lambda_target && k < 60; ++k) {
    T_lo *= 0.5;
    if (2.0 * T_lo / h < 4.0)
      throw ResolutionError("find_T: spacing too coarse for the target level");
    lam_lo = lam_at(T_lo);
  }
  double lam_hi = lam_lo;
  T_hi = T_lo;
  for (int k = 0; lam_hi > lambda_target && k < 60; ++k) {
    T_hi *= 2.0;
    lam_hi = lam_at(T_hi);
  }
  if (lam_hi > lambda_target)
    throw DomainError("find_T: level stays above the target; target too close "
                      "to the threshold");

  for (int it = 0; it < 200; ++it) {
    const double T = 0.5 * (T_lo + T_hi);
    const double lam = lam_at(T);
    if (std::abs(lam - lambda_target) < tol * lambda_target) return T;
    if (lam > lambda_target)
      T_lo = T;
    else
      T_hi = T;
    if (T_hi - T_lo < 1e-6 * h)
      throw SolverError(
          "find_T: bisection plateau (discrete level set is flat here)", lam,
          std::abs(lam - lambda_target), it);
  }
  throw SolverError("find_T: bisection did not converge", 0.0, 0.0, 200);
}

ReflectedSequence build_reflected(const StripConfig& cfg) {
  if (cfg.n_max < 1) throw ParameterError("build_reflected: n_max must be >= 1");
  const double h = cfg.h;
  ReflectedSequence seq;
  seq.alpha = cfg.alpha;
  seq.p = cfg.p;

  double T;
  if (cfg.T_override) {
    T = *cfg.T_override;
    const double m = T / h;
    if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m))
      throw AlignmentError(
          "build_reflected: T must be a whole number of cells; nearest "
          "aligned spacing is T/round(T/h)",
          T / std::max(1.0, std::round(m)));
  } else {
    const double T_raw =
        find_T(cfg.alpha, cfg.p, cfg.lambda_target, h, cfg.find_tol);
    T = h * std::max(2.0, std::round(T_raw / h));
  }
  seq.T = T;
  const Index m = static_cast<Index>(std::llround(T / h));

  const EnergyConfig ecfg = strip_energy_config(cfg.p, h);
  SolveOptions psi_opts = cfg.solve;
  psi_opts.tol = std::min(psi_opts.tol, 1e-10);
  seq.psi = first_eigen(make_rectangle(cfg.alpha, T, h), ecfg, psi_opts).u;
  seq.lambda = dirichlet_energy(seq.psi, ecfg);

  const GridDomain2D& base = *seq.psi.domain;
  const Index nx = base.nx();
  for (int n = 0; n <= cfg.n_max; ++n) {
    const double Tn = (2.0 * n + 1.0) * T;
    DomainPtr dom_n = make_rectangle(cfg.alpha, Tn, h);
    const GridDomain2D& dn = *dom_n;
    if (dn.nx() != nx || dn.ny() != (2 * n + 1) * 2 * m + 1)
      throw AlignmentError("build_reflected: member grid misaligned", h);
    GridFunction u(dom_n);
    for (int k = -n; k <= n; ++k) {
      const Index off = static_cast<Index>(2 * (k + n)) * m;
      const bool even = ((k % 2) == 0);
      for (Index r = 0; r <= 2 * m; ++r) {
        const Index src_row = even ? r : 2 * m - r;
        const double sign = even ? 1.0 : -1.0;
        for (Index i = 0; i < nx; ++i)
          u.values[dn.node(i, off + r)] =
              sign * seq.psi.values[base.node(i, src_row)];
      }
    }
    u.values /= lp_norm(u, cfg.p);
    seq.members.emplace_back(n, std::move(u));
  }

  // Edge-defect dual norms on the common truncation.
  DomainPtr big = reflected_dual_grid(seq);
  SpdSolver K(sobolev_matrix(*big, ecfg.quadrature));
  for (std::size_t idx = 0; idx < seq.members.size(); ++idx) {
    DualFunctional kappa = boundary_line_functional(seq, idx, big, ecfg);
    seq.boundary_defect.push_back(dual_norm_precond(kappa, ecfg, K).value);
  }
  return seq;
}

DomainPtr reflected_dual_grid(const ReflectedSequence& seq) {
  const int n_max = seq.members.empty() ? 0 : seq.members.back().first;
  const double h = seq.psi.domain->spacing();
  return make_rectangle(seq.alpha, (2.0 * n_max + 3.0) * seq.T, h);
}

DualFunctional boundary_line_functional(const ReflectedSequence& seq,
                                        std::size_t member_index,
                                        const DomainPtr& big,
                                        const EnergyConfig& cfg) {
  const auto& [n, u] = seq.members.at(member_index);
  const GridDomain2D& dn = *u.domain;
  const GridDomain2D& db = *big;
  const double h = dn.spacing();
  const Index m = static_cast<Index>(std::llround(seq.T / h));
  const Index mn = static_cast<Index>(2 * n + 1) * m;  // T_n in cells
  const Index mb = (db.ny() - 1) / 2;                  // big half-height

  DualFunctional F{big, ArrayXd::Zero(db.num_nodes())};
  const Index top_n = 2 * mn, bot_n = 0;
  const Index top_b = mb + mn, bot_b = mb - mn;
  for (Index i = 0; i < dn.nx(); ++i) {
    // one-sided vertical derivatives at the member edges
    const double dy_top = (0.0 - u.values[dn.node(i, top_n - 1)]) / h;
    const double dy_bot = (u.values[dn.node(i, bot_n + 1)] - 0.0) / h;
    const Index id_top = db.node(i, top_b);
    const Index id_bot = db.node(i, bot_b);
    if (db.interior(id_top) && dy_top != 0.0)
      F.coeffs[id_top] += detail::signed_pow(dy_top, cfg.p) / h;
    if (db.interior(id_bot) && dy_bot != 0.0)
      F.coeffs[id_bot] -= detail::signed_pow(dy_bot, cfg.p) / h;
  }
  return F;
}

ResidualDecay residual_decay(const ReflectedSequence& seq,
                             const EnergyConfig& cfg) {
  if (seq.members.size() < 4)
    throw ParameterError("residual_decay: need at least 4 members");
  ResidualDecay out;
  DomainPtr big = reflected_dual_grid(seq);
  SpdSolver K(sobolev_matrix(*big, cfg.quadrature));
  out.grad_psi_sup = max_cell_gradient(seq.psi, cfg);
  const double h = seq.psi.domain->spacing();
  const double pp = (cfg.p - 1.0) / cfg.p;
  const double pref =
      4.0 * std::pow(seq.alpha, pp) * std::pow(out.grad_psi_sup, cfg.p - 1.0);

  out.residuals.resize(seq.members.size());
  for (std::size_t idx = 0; idx < seq.members.size(); ++idx) {
    const auto& [n, u] = seq.members[idx];
    out.n_values.push_back(n);
    out.two_n_plus_one.push_back(2.0 * n + 1.0);
    GridFunction emb = embed_zero(u, big);
    DualFunctional F =
        el_residual_functional(emb, seq.lambda, nullptr, cfg);
    out.residuals[idx] = dual_norm_precond(F, cfg, K).value;
  }
  for (std::size_t idx = 0; idx < seq.members.size(); ++idx) {
    const double bound = pref * std::pow(out.two_n_plus_one[idx], -pp);
    out.bounds.push_back(bound);
    out.bound_ok.push_back(out.residuals[idx] <=
                           bound * (1.0 + out.slack_h_factor * h));
  }
  out.slope = loglog_slope(out.two_n_plus_one, out.residuals);
  return out;
}

double pohozaev_defect(const GridFunction& u, double lambda,
                       const EnergyConfig& cfg) {
  const double p = cfg.p;
  const double mass = std::pow(lp_norm(u, p), p);
  const double energy = dirichlet_energy(u, cfg);
  return (lambda / p) * mass - energy / p + gradient_x2_term(u, cfg);
}

TraceCheckResult trace_check(double alpha, double p, int samples, double h,
                             std::uint64_t seed) {
  if (samples < 1) throw ParameterError("trace_check: samples must be >= 1");
  const double box = 4.0;
  DomainPtr dom = make_rectangle(alpha, box, h);
  const GridDomain2D& d = *dom;
  EnergyConfig cfg = strip_energy_config(p, h);
  std::mt19937_64 rng(seed);

  TraceCheckResult out;
  out.samples = samples;
  out.bound = 2.0 * std::pow(alpha, (p - 1.0) / p);
  for (int s = 0; s < samples; ++s) {
    const double w1 = alpha * (0.3 + 0.55 * uniform01(rng));
    const double c1 = (alpha - w1) * (2.0 * uniform01(rng) - 1.0) * 0.9;
    const double w2 = 0.4 + 1.0 * uniform01(rng);
    const double c2 = (2.0 * uniform01(rng) - 1.0) * 1.4;
    const double amp = 0.5 + 2.0 * uniform01(rng);
    const auto bump1 = [](double t) {
      const double q = 1.0 - t * t;
      return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
    };
    GridFunction phi = sample(dom, [&](double x, double y) {
      return amp * bump1((x - c1) / w1) * bump1((y - c2) / w2);
    });

    // random edge height within the band that keeps (T, T+1) inside the box
    const Index j_lo = static_cast<Index>(std::ceil((box - 2.0) / h));
    const Index j_hi = d.ny() - 1 - static_cast<Index>(std::ceil(1.5 / h));
    const Index j =
        j_lo + static_cast<Index>(uniform01(rng) *
                                  static_cast<double>(j_hi - j_lo));
    double line = 0.0;
    for (Index i = 0; i < d.nx(); ++i)
      line += std::abs(phi.values[d.node(i, j)]);
    line *= h;

    const double nrm = sobolev_norm(phi, cfg);
    if (nrm == 0.0) continue;
    out.worst_ratio = std::max(out.worst_ratio, line / nrm);
  }
  return out;
}

} // namespace pspect
