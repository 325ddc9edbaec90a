// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_STRIP_HPP
#define PSPECT_STRIP_HPP

#include <optional>
#include <utility>
#include <vector>

#include "pspect/eigensolve.hpp"
#include "pspect/energy.hpp"
#include "pspect/grid.hpp"

namespace pspect {

struct StripConfig {
  double alpha = 0.5;
  double p = 2.0;
  double lambda_target = 0.0;  // level above (pi_p / 2 alpha)^p
  double h = 1.0 / 64.0;
  int n_max = 6;
  double find_tol = 0.01;              // relative tolerance of find_T
  std::optional<double> T_override{};  // explicit half-height (must be on the lattice)
  SolveOptions solve{};
};

// One-dimensional sharp Poincare constant of (-1/2, 1/2):
// lambda_p(I)^{1/p}, Richardson-extrapolated over spacings {h, h/2}.
double pi_p(double p, double h);

// T -> lambda_p((-alpha,alpha) x (-T,T)); strictly decreasing in T.
std::vector<std::pair<double, double>> lambda_curve(
    double alpha, double p, const std::vector<double>& T_list, double h,
    const SolveOptions& opts = {}, int jobs = 1);

// Half-height with lambda_p(S_{alpha,T}) = lambda_target, by bisection on
// the discrete eigenvalue at spacing h.
double find_T(double alpha, double p, double lambda_target, double h,
              double tol);

// Base-cell eigenfunction psi on S_{alpha,T} extended over S_{alpha,(2n+1)T}
// by alternating odd reflections:
//   u_n = (2n+1)^{-1/p} sum_{k=-n..n} (-1)^{|k|} psi(x1, (-1)^{|k|}(x2-2kT)).
// Unit L^p norm and energy = lambda hold exactly up to rounding.
struct ReflectedSequence {
  GridFunction psi;
  double T = 0.0;
  double lambda = 0.0;  // discrete eigenvalue of the base cell
  double alpha = 0.0;
  double p = 2.0;
  std::vector<std::pair<int, GridFunction>> members;  // (n, u_n)
  std::vector<double> boundary_defect;  // dual norm of the edge functional kappa_n
};

ReflectedSequence build_reflected(const StripConfig& cfg);

// Grid for the dual-norm truncation S_{alpha,(2 n_max + 3) T}.
DomainPtr reflected_dual_grid(const ReflectedSequence& seq);

// The edge-line functional kappa_n of a member, assembled on `big`:
// density |grad u_n|^{p-2} d2 u_n along x2 = +-(2n+1)T (one-sided).
DualFunctional boundary_line_functional(const ReflectedSequence& seq,
                                        std::size_t member_index,
                                        const DomainPtr& big,
                                        const EnergyConfig& cfg);

struct ResidualDecay {
  std::vector<int> n_values;
  std::vector<double> two_n_plus_one;
  std::vector<double> residuals;  // EL dual residual at the sequence level
  std::vector<double> bounds;     // 4 alpha^{1/p'} (2n+1)^{-1/p'} |grad psi|_sup^{p-1}
  std::vector<bool> bound_ok;     // residual <= bound * (1 + slack_h_factor * h)
  double slope = 0.0;             // log-log fit of residual vs (2n+1)
  double grad_psi_sup = 0.0;
  double slack_h_factor = 10.0;
};

ResidualDecay residual_decay(const ReflectedSequence& seq,
                             const EnergyConfig& cfg);

// (lambda/p)||u||_p^p - (1/p) dirichlet_energy(u) + sum |grad u|^{p-2}(d2 u)^2.
double pohozaev_defect(const GridFunction& u, double lambda,
                       const EnergyConfig& cfg);

struct TraceCheckResult {
  double worst_ratio = 0.0;  // line L^1 integral over W^{1,p} norm
  double bound = 0.0;        // 2 alpha^{(p-1)/p}
  int samples = 0;
};

// Random compactly supported bumps against the edge-trace bound.
TraceCheckResult trace_check(double alpha, double p, int samples, double h,
                             std::uint64_t seed = 0x9b1e5eedULL);

} // namespace pspect

#endif
