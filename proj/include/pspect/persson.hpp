// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_PERSSON_HPP
#define PSPECT_PERSSON_HPP

#include <functional>
#include <optional>
#include <vector>

#include "pspect/eigensolve.hpp"
#include "pspect/energy.hpp"
#include "pspect/grid.hpp"

namespace pspect {

// Exterior-domain generator: R -> truncated grid for Omega \ closure(B_R).
// Throws ResolutionError when the truncated exterior is empty.
using ExteriorFamily = std::function<DomainPtr(double R)>;

// Truncated-domain generator for an unbounded set: half_len -> grid for
// Omega intersected with {|x2| <= half_len}; successive grids must share the
// node lattice (the factory snaps half_len to whole cells).
struct TruncatedFamily {
  std::function<DomainPtr(double half_len)> make;
};

ExteriorFamily strip_exterior_family(double alpha, double h, double box_half);
TruncatedFamily strip_truncated_family(double alpha, double h);

struct PerssonSweep {
  std::vector<double> radii;
  std::vector<double> lambdas_raw;   // one first_eigen per radius; +inf when empty
  std::vector<double> lambdas;       // running maximum of lambdas_raw
  double box_half_length = 0.0;
  double e_p_estimate = 0.0;         // sup over the sweep
};

PerssonSweep persson_sweep(const ExteriorFamily& family,
                           const std::vector<double>& radii,
                           const EnergyConfig& cfg,
                           const SolveOptions& opts = {}, int jobs = 1,
                           double box_half_length = 0.0);

// Per-index diagnostics of the variational Palais-Smale construction: the
// ground state u_n of -Delta_p + V_n with V_n = sqrt(n) zeta_n + |x|/R_n^2,
// where R_n covers the support of a low-energy probe of the exterior set.
struct PSRecord {
  int n = 0;
  double R_n = 0.0;
  double eps_n = 0.0;              // 1/R_n^2 exactly
  double lambda_n = 0.0;
  double dual_residual = 0.0;      // EL defect of u_n at the E_p estimate
  std::vector<double> local_mass;  // ball_mass(u_n, r) for r = 1..floor(L)
  std::vector<double> moments_I;   // sum V^k |u|^p h^2, k = 1..K
  std::vector<double> moments_J;   // sum V^{k-1} |grad u|^p h^2, k = 1..K
  double moment_I_pprime = 0.0;    // sum V^{p'} |u|^p h^2
  // Probe diagnostics backing the lambda_n upper-bound chain.
  double probe_energy = 0.0;           // |grad v_n|^p integral
  double probe_confinement_term = 0.0; // eps_n * sum |x| |v_n|^p h^2
  double lambda_exterior = 0.0;        // lambda_p((Omega \ B_2n) ∩ box)
  GridFunction u;
};

struct PsOptions {
  std::vector<int> n_list;
  int moments_k = 3;
  double e_p_estimate = 0.0;    // level for the dual residual (from a sweep)
  double box_half_min = 0.0;    // truncation never smaller than this
  double fixed_box_half = 0.0;  // > 0: exact box; ConfigError if < 2 R_n
  double support_threshold = 1e-12;
  SolveOptions solve{};
  int jobs = 1;
};

std::vector<PSRecord> build_ps_sequence(const TruncatedFamily& family,
                                        const PsOptions& opts,
                                        const EnergyConfig& cfg);

enum class PsVerdict { regular, singular, undetermined };

struct PSClassification {
  PsVerdict verdict = PsVerdict::undetermined;
  std::vector<double> d_metric_trace;  // d_{L^p}(u_n, 0) per member
  std::optional<GridFunction> limit_candidate;
};

struct ClassifyOptions {
  double p = 2.0;
  int j_max = 0;                    // 0: derived from the inputs
  double singular_threshold = 0.05;
  double stabilize_tol = 0.05;
};

// The exhaustion metric d(u,v) = sum_j j^{-2} m_j / (1 + m_j) with
// m_j = ||u - v||_{L^p(B_j)}, truncated at j_max.
double d_lp_metric(const GridFunction& u, const GridFunction* v, int j_max,
                   double p);

PSClassification classify_ps(const std::vector<PSRecord>& records,
                             const ClassifyOptions& opts = {});
PSClassification classify_ps(const std::vector<GridFunction>& seq,
                             const ClassifyOptions& opts);

struct MomentReport {
  std::vector<int> n_values;
  int K = 0;
  std::vector<std::vector<double>> I;  // [record][k-1]
  std::vector<std::vector<double>> J;
  std::vector<double> slope_I, slope_J;  // log-log decay rates vs n
  std::vector<bool> tail_decreasing_I, tail_decreasing_J;
};

MomentReport moment_report(const std::vector<PSRecord>& records);

} // namespace pspect

#endif
