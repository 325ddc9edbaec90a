// SPDX-License-Identifier: Apache-2.0
#include "pspect/persson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pspect/fit.hpp"
#include "pspect/parallel.hpp"
#include "kernels.hpp"

namespace pspect {

double loglog_slope(const std::vector<double>& x,
                    const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < x.size() && k < y.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) throw ParameterError("loglog_slope: need two positive samples");
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw ParameterError("loglog_slope: degenerate abscissae");
  return (m * sxy - sx * sy) / denom;
}

ExteriorFamily strip_exterior_family(double alpha, double h, double box_half) {
  DomainPtr base = make_rectangle(alpha, box_half, h);
  return [base](double R) { return make_exterior(base, R); };
}

TruncatedFamily strip_truncated_family(double alpha, double h) {
  TruncatedFamily fam;
  fam.make = [alpha, h](double half_len) {
    const double snapped =
        h * std::ceil(half_len / h - 1e-9);  // keep one node lattice
    return make_rectangle(alpha, snapped, h);
  };
  return fam;
}

PerssonSweep persson_sweep(const ExteriorFamily& family,
                           const std::vector<double>& radii,
                           const EnergyConfig& cfg, const SolveOptions& opts,
                           int jobs, double box_half_length) {
  for (std::size_t k = 0; k + 1 < radii.size(); ++k)
    if (!(radii[k] < radii[k + 1]))
      throw ParameterError("persson_sweep: radii must be strictly increasing");
  if (!radii.empty() && radii.front() < 0.0)
    throw ParameterError("persson_sweep: radii must be nonnegative");

  PerssonSweep out;
  out.radii = radii;
  out.box_half_length = box_half_length;
  out.lambdas_raw.assign(radii.size(),
                         std::numeric_limits<double>::infinity());
  parallel_for(static_cast<Index>(radii.size()), jobs, [&](Index i) {
    try {
      DomainPtr dom = family(radii[static_cast<std::size_t>(i)]);
      out.lambdas_raw[static_cast<std::size_t>(i)] =
          first_eigen(dom, cfg, opts).lambda;
    } catch (const ResolutionError&) {
      // empty exterior: inf over the empty set
    }
  });
  out.lambdas = out.lambdas_raw;
  double running = -std::numeric_limits<double>::infinity();
  for (auto& v : out.lambdas) {
    running = std::max(running, v);
    v = running;
  }
  out.e_p_estimate = out.lambdas.empty() ? 0.0 : out.lambdas.back();
  return out;
}

namespace {

double support_radius(const GridFunction& u, double threshold) {
  const GridDomain2D& dom = *u.domain;
  const double vmax = u.values.abs().maxCoeff();
  if (vmax == 0.0) return 0.0;
  double r2max = 0.0;
  for (Index id : dom.dof_nodes())
    if (std::abs(u.values[id]) > threshold * vmax)
      r2max = std::max(r2max, dom.radius2(id));
  return std::sqrt(r2max);
}

PSRecord build_one(const TruncatedFamily& family, int n, const PsOptions& opts,
                   const EnergyConfig& cfg) {
  if (n < 1) throw ParameterError("build_ps_sequence: n must be >= 1");
  const double exclusion = 2.0 * static_cast<double>(n);

  // Probe window long enough that the vertical mode costs at most ~1/n.
  double rho = exclusion + std::ceil(M_PI * std::sqrt(double(n))) + 1.0;
  double L = std::max({opts.box_half_min, 2.0 * (rho + 1.0)});
  if (opts.fixed_box_half > 0.0) L = opts.fixed_box_half;

  DomainPtr dom;
  EigenResult ext, probe;
  for (int attempt = 0;; ++attempt) {
    dom = family.make(L);
    DomainPtr ext_dom = make_exterior(dom, exclusion);
    ext = first_eigen(ext_dom, cfg, opts.solve);
    bool ok = false;
    for (int grow = 0; grow < 10; ++grow) {
      DomainPtr probe_dom;
      try {
        probe_dom = intersect_ball(ext_dom, rho);
      } catch (const ResolutionError&) {
        rho *= 1.4;
        continue;
      }
      probe = first_eigen(probe_dom, cfg, opts.solve);
      if (probe.lambda - ext.lambda <= 1.0 / static_cast<double>(n) ||
          rho >= 0.9 * L) {
        ok = true;
        break;
      }
      rho = std::min(rho * 1.4, 0.9 * L);
    }
    const double R_n = support_radius(probe.u, opts.support_threshold) +
                       dom->spacing();
    if (opts.fixed_box_half > 0.0) {
      if (opts.fixed_box_half < 2.0 * R_n)
        throw ConfigError(
            "build_ps_sequence: truncation box too small for the probe "
            "support; need box half-length >= " +
            std::to_string(2.0 * R_n));
      break;
    }
    if (ok && L >= 2.0 * R_n) break;
    if (attempt >= 4)
      throw SolverError("build_ps_sequence: probe sizing did not settle",
                        probe.lambda, rho, attempt);
    L = std::max(1.5 * L, 2.0 * R_n + 2.0);
  }

  PSRecord rec;
  rec.n = n;
  rec.R_n = support_radius(probe.u, opts.support_threshold) + dom->spacing();
  rec.eps_n = 1.0 / (rec.R_n * rec.R_n);
  rec.lambda_exterior = ext.lambda;
  rec.probe_energy = dirichlet_energy(probe.u, cfg);

  PotentialSpec pot;
  pot.R = static_cast<double>(n);
  pot.eps = rec.eps_n;
  const ArrayXd V = potential_values(pot, *dom);

  {
    detail::ChunkSum s;
    const GridDomain2D& d = *dom;
    for (Index id : d.dof_nodes())
      s.add(std::sqrt(d.radius2(id)) *
            detail::abs_pow(probe.u.values[id], cfg.p));
    rec.probe_confinement_term = rec.eps_n * s.value() * d.cell_measure();
  }

  EigenResult ground = weighted_ground_state(dom, V, cfg, opts.solve);
  rec.lambda_n = ground.lambda;
  rec.u = ground.u;

  rec.dual_residual =
      el_residual(rec.u, opts.e_p_estimate,
                  static_cast<const ArrayXd*>(nullptr), cfg);

  const int rmax = static_cast<int>(std::floor(L));
  for (int r = 1; r <= rmax; ++r)
    rec.local_mass.push_back(ball_mass(rec.u, static_cast<double>(r), cfg.p));

  const GridDomain2D& d = *dom;
  const double pprime = cfg.p / (cfg.p - 1.0);
  ArrayXd Vk = ArrayXd::Ones(d.num_nodes());
  for (int k = 1; k <= opts.moments_k; ++k) {
    rec.moments_J.push_back(weighted_dirichlet_energy(rec.u, Vk, cfg));
    Vk *= V;
    detail::ChunkSum s;
    for (Index id : d.dof_nodes())
      s.add(Vk[id] * detail::abs_pow(rec.u.values[id], cfg.p));
    rec.moments_I.push_back(s.value() * d.cell_measure());
  }
  {
    detail::ChunkSum s;
    for (Index id : d.dof_nodes())
      s.add(std::pow(V[id], pprime) *
            detail::abs_pow(rec.u.values[id], cfg.p));
    rec.moment_I_pprime = s.value() * d.cell_measure();
  }
  return rec;
}

} // namespace

std::vector<PSRecord> build_ps_sequence(const TruncatedFamily& family,
                                        const PsOptions& opts,
                                        const EnergyConfig& cfg) {
  if (opts.n_list.empty())
    throw ParameterError("build_ps_sequence: empty n list");
  std::vector<PSRecord> records(opts.n_list.size());
  parallel_for(static_cast<Index>(opts.n_list.size()), opts.jobs,
               [&](Index i) {
                 records[static_cast<std::size_t>(i)] = build_one(
                     family, opts.n_list[static_cast<std::size_t>(i)], opts,
                     cfg);
               });
  return records;
}

double d_lp_metric(const GridFunction& u, const GridFunction* v, int j_max,
                   double p) {
  GridFunction diff = u;
  if (v) {
    if (v->domain == u.domain) {
      diff.values = u.values - v->values;
    } else {
      // zero-extend both into the larger grid
      const bool u_big = u.domain->num_nodes() >= v->domain->num_nodes();
      const GridFunction& big = u_big ? u : *v;
      GridFunction small_in_big = embed_zero(u_big ? *v : u, big.domain);
      diff = GridFunction(big.domain, u_big
                                          ? (u.values - small_in_big.values)
                                          : (small_in_big.values - v->values));
    }
  }
  double d = 0.0;
  for (int j = 1; j <= j_max; ++j) {
    const double m = ball_mass(diff, static_cast<double>(j), p);
    d += (m / (1.0 + m)) / (static_cast<double>(j) * static_cast<double>(j));
  }
  return d;
}

namespace {

PSClassification classify_core(const std::vector<const GridFunction*>& seq,
                               const std::vector<double>* d_from_records,
                               const ClassifyOptions& opts, int j_max) {
  if (seq.size() < 3)
    throw ParameterError("classify_ps: need at least 3 members");
  for (const auto* u : seq)
    if (std::abs(lp_norm(*u, opts.p) - 1.0) > 1e-6)
      throw ParameterError("classify_ps: members must have unit L^p norm");

  PSClassification out;
  if (d_from_records) {
    out.d_metric_trace = *d_from_records;
  } else {
    for (const auto* u : seq)
      out.d_metric_trace.push_back(d_lp_metric(*u, nullptr, j_max, opts.p));
  }

  const auto& d = out.d_metric_trace;
  const std::size_t m = d.size();
  const bool decreasing = d[m - 3] > d[m - 2] && d[m - 2] > d[m - 1];
  if (decreasing && d[m - 1] < opts.singular_threshold) {
    out.verdict = PsVerdict::singular;
    return out;
  }

  const GridFunction* tail = seq.back();
  bool stable = true;
  for (std::size_t k = m - 3; k + 1 < m; ++k)
    if (d_lp_metric(*seq[k], tail, j_max, opts.p) >= opts.stabilize_tol) {
      stable = false;
      break;
    }
  if (stable &&
      d_lp_metric(*tail, nullptr, j_max, opts.p) >= opts.singular_threshold) {
    out.verdict = PsVerdict::regular;
    out.limit_candidate = *tail;
    return out;
  }
  out.verdict = PsVerdict::undetermined;
  return out;
}

} // namespace

PSClassification classify_ps(const std::vector<PSRecord>& records,
                             const ClassifyOptions& opts) {
  if (records.size() < 3)
    throw ParameterError("classify_ps: need at least 3 members");
  std::size_t jm = records.front().local_mass.size();
  for (const auto& r : records) jm = std::min(jm, r.local_mass.size());
  const int j_max = opts.j_max > 0 ? opts.j_max : static_cast<int>(jm);

  std::vector<double> d_trace;
  for (const auto& r : records) {
    double d = 0.0;
    for (int j = 1; j <= j_max; ++j) {
      const double mj = r.local_mass[static_cast<std::size_t>(j - 1)];
      d += (mj / (1.0 + mj)) /
           (static_cast<double>(j) * static_cast<double>(j));
    }
    d_trace.push_back(d);
  }
  std::vector<const GridFunction*> seq;
  for (const auto& r : records) seq.push_back(&r.u);
  return classify_core(seq, &d_trace, opts, j_max);
}

PSClassification classify_ps(const std::vector<GridFunction>& seq,
                             const ClassifyOptions& opts) {
  int j_max = opts.j_max;
  if (j_max <= 0) {
    double r2 = 0.0;
    for (const auto& u : seq) {
      const GridDomain2D& d = *u.domain;
      for (Index id : d.dof_nodes()) r2 = std::max(r2, d.radius2(id));
    }
    j_max = std::max(1, static_cast<int>(std::floor(std::sqrt(r2))));
  }
  std::vector<const GridFunction*> ptrs;
  for (const auto& u : seq) ptrs.push_back(&u);
  return classify_core(ptrs, nullptr, opts, j_max);
}

MomentReport moment_report(const std::vector<PSRecord>& records) {
  if (records.empty())
    throw ParameterError("moment_report: no records");
  MomentReport rep;
  rep.K = static_cast<int>(records.front().moments_I.size());
  for (const auto& r : records) {
    if (static_cast<int>(r.moments_I.size()) < rep.K)
      throw ParameterError("moment_report: inconsistent moment ranges");
    rep.n_values.push_back(r.n);
    rep.I.push_back(r.moments_I);
    rep.J.push_back(r.moments_J);
  }
  std::vector<double> ns;
  for (int n : rep.n_values) ns.push_back(static_cast<double>(n));
  const std::size_t half = records.size() / 2;
  for (int k = 0; k < rep.K; ++k) {
    std::vector<double> Ik, Jk;
    for (std::size_t i = 0; i < records.size(); ++i) {
      Ik.push_back(rep.I[i][static_cast<std::size_t>(k)]);
      Jk.push_back(rep.J[i][static_cast<std::size_t>(k)]);
    }
    rep.slope_I.push_back(loglog_slope(ns, Ik));
    rep.slope_J.push_back(loglog_slope(ns, Jk));
    bool decI = true, decJ = true;
    for (std::size_t i = std::max<std::size_t>(half, 1); i < records.size();
         ++i) {
      if (!(Ik[i] < Ik[i - 1])) decI = false;
      if (!(Jk[i] < Jk[i - 1])) decJ = false;
    }
    rep.tail_decreasing_I.push_back(decI);
    rep.tail_decreasing_J.push_back(decJ);
  }
  return rep;
}

} // namespace pspect
