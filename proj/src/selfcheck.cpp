// SPDX-License-Identifier: Apache-2.0
#include "pspect/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "pspect/eigensolve.hpp"
#include "pspect/io.hpp"
#include "pspect/persson.hpp"
#include "pspect/strip.hpp"
#include "pspect/weyl2.hpp"

namespace pspect {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Harness {
  std::ostream& os;
  bool all_ok = true;
  int ran = 0;

  void run(const char* name, const std::function<bool(std::string&)>& body) {
    ++ran;
    std::string detail;
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    os << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) os << "  (" << detail << ")";
    os << '\n';
    all_ok = all_ok && ok;
  }
};

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

GridFunction random_function(DomainPtr dom, std::mt19937_64& rng) {
  GridFunction u(dom);
  for (Index id : dom->dof_nodes())
    u.values[id] = 2.0 * uniform01(rng) - 1.0;
  return u;
}

// Central finite difference of (1/p) * smoothed energy along v.
double fd_pairing(const GridFunction& u, const GridFunction& v,
                  const EnergyConfig& cfg) {
  const double delta = 6e-6;
  GridFunction up(u.domain, u.values + delta * v.values);
  GridFunction um(u.domain, u.values - delta * v.values);
  return (smoothed_dirichlet_energy(up, cfg) -
          smoothed_dirichlet_energy(um, cfg)) /
         (2.0 * delta * cfg.p);
}

} // namespace

bool run_self_checks(std::ostream& os) {
  Harness H{os};

  // --- grid ------------------------------------------------------------
  H.run("grid: rectangle interior node counts", [&](std::string& d) {
    auto a = make_rectangle(0.5, 0.5, 0.25);
    auto b = make_rectangle(0.5, 1.5, 0.25);
    bool coarse_rejected = false;
    try {
      make_rectangle(0.5, 0.5, 0.6);
    } catch (const ResolutionError&) {
      coarse_rejected = true;
    }
    d = "counts " + std::to_string(a->interior_count()) + ", " +
        std::to_string(b->interior_count());
    return a->interior_count() == 9 && b->interior_count() == 33 &&
           coarse_rejected;
  });

  H.run("grid: exterior mask against direct enumeration", [&](std::string& d) {
    auto base = make_rectangle(0.5, 4.0, 0.125);
    auto ext = make_exterior(base, 1.0);
    Index expected = 0;
    for (Index id = 0; id < base->num_nodes(); ++id)
      if (base->interior(id) && base->radius2(id) > 1.0) ++expected;
    auto e0 = make_exterior(base, 0.0);
    bool nested = true;
    auto e2 = make_exterior(base, 2.0);
    for (Index id = 0; id < base->num_nodes(); ++id)
      if (e2->interior(id) && !ext->interior(id)) nested = false;
    bool empty_rejected = false;
    try {
      make_exterior(make_rectangle(0.5, 0.5, 0.125), 10.0);
    } catch (const ResolutionError&) {
      empty_rejected = true;
    }
    d = "kept " + std::to_string(ext->interior_count());
    return ext->interior_count() == expected &&
           e0->interior_count() == base->interior_count() && nested &&
           empty_rejected;
  });

  H.run("grid: ball_mass restriction and monotonicity", [&](std::string&) {
    auto dom = make_rectangle(2.0, 2.0, 0.125);
    std::mt19937_64 rng(11);
    GridFunction u = random_function(dom, rng);
    const double full = lp_norm(u, 2.0);
    double prev = 0.0;
    bool mono = true;
    for (double R : {0.5, 1.0, 2.0, 4.0}) {
      const double m = ball_mass(u, R, 2.0);
      if (m + 1e-15 < prev) mono = false;
      prev = m;
    }
    GridFunction z(dom);
    return mono && std::abs(prev - full) < 1e-12 &&
           ball_mass(z, 1.0, 2.0) == 0.0;
  });

  H.run("grid: serialization round-trip is bit-exact", [&](std::string&) {
    auto dom = make_rectangle(0.75, 0.5, 0.125);
    std::mt19937_64 rng(7);
    GridFunction u = random_function(dom, rng);
    u.values *= 1e-7;  // exercise subnormal-ish magnitudes
    const auto path = std::filesystem::temp_directory_path() /
                      "pspect_selfcheck_roundtrip.grid";
    save_grid_function(u, path.string());
    GridFunction v = load_grid_function(path.string());
    std::filesystem::remove(path);
    if (v.domain->nx() != dom->nx() || v.domain->ny() != dom->ny())
      return false;
    for (Index id = 0; id < u.values.size(); ++id)
      if (u.values[id] != v.values[id]) return false;
    for (Index id = 0; id < u.values.size(); ++id)
      if (v.domain->interior(id) != dom->interior(id)) return false;
    return true;
  });

  // --- energy ----------------------------------------------------------
  H.run("energy: zero, linear harmonicity, p-homogeneity", [&](std::string& d) {
    EnergyConfig c2;
    auto dom = make_rectangle(1.0, 1.0, 0.125);
    GridFunction z(dom);
    if (dirichlet_energy(z, c2) != 0.0) return false;

    // a linear profile is discretely harmonic away from the mask edge
    const double s = 0.7;
    GridFunction lin = sample(dom, [&](double x, double) { return s * x; });
    DualFunctional F = p_laplacian_apply(lin, c2);
    for (Index id : dom->dof_nodes()) {
      const Index i = id % dom->nx(), j = id / dom->nx();
      bool inner = true;
      for (Index dj = -1; dj <= 1 && inner; ++dj)
        for (Index di = -1; di <= 1; ++di)
          if (!dom->interior(dom->node(i + di, j + dj))) {
            inner = false;
            break;
          }
      if (inner && std::abs(F.coeffs[id]) > 1e-11) return false;
    }

    bool hom = true;
    std::mt19937_64 rng(3);
    GridFunction u = random_function(dom, rng);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      EnergyConfig c;
      c.p = p;
      const double e1 = dirichlet_energy(u, c);
      GridFunction tu(dom, 3.0 * u.values);
      if (!close_rel(dirichlet_energy(tu, c), std::pow(3.0, p) * e1, 1e-12))
        hom = false;
    }
    d = "homogeneity across p in {1.5,2,3,4}";
    return hom;
  });

  H.run("energy: p=2 weak form equals the 5-point stencil", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 16.0);
    std::mt19937_64 rng(5);
    GridFunction u = random_function(dom, rng);
    EnergyConfig c2;
    DualFunctional F = p_laplacian_apply(u, c2);
    const double h = dom->spacing();
    for (Index id : dom->dof_nodes()) {
      const Index i = id % dom->nx(), j = id / dom->nx();
      const double lap =
          (4.0 * u.values[id] - u.values[dom->node(i - 1, j)] -
           u.values[dom->node(i + 1, j)] - u.values[dom->node(i, j - 1)] -
           u.values[dom->node(i, j + 1)]) /
          (h * h);
      if (!close_rel(F.coeffs[id], lap, 1e-11)) return false;
    }
    return true;
  });

  H.run("energy: gradient matches finite differences", [&](std::string& d) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 16.0);
    std::mt19937_64 rng(17);
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      EnergyConfig c;
      c.p = p;
      if (p < 2.0) c.eps_reg = dom->spacing();
      GridFunction u = random_function(dom, rng);
      DualFunctional F = p_laplacian_apply(u, c);
      for (int k = 0; k < 3; ++k) {
        GridFunction v = random_function(dom, rng);
        const double lhs = F(v);
        const double rhs = fd_pairing(u, v, c);
        worst = std::max(worst,
                         std::abs(lhs - rhs) / std::max(1e-12, std::abs(rhs)));
      }
    }
    std::ostringstream ss;
    ss << "worst rel err " << worst;
    d = ss.str();
    return worst < 1e-5;
  });

  H.run("energy: (p-1)-homogeneity of the weak form", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 8.0);
    std::mt19937_64 rng(23);
    GridFunction u = random_function(dom, rng);
    // p >= 2 plain; p < 2 needs the smoothing scaled along (mask corner
    // cells always carry an exactly degenerate corner gradient).
    for (double p : {1.5, 2.0, 3.0}) {
      EnergyConfig c1, c2;
      c1.p = c2.p = p;
      if (p < 2.0) {
        c1.eps_reg = dom->spacing();
        c2.eps_reg = 2.0 * c1.eps_reg;
      }
      GridFunction tu(dom, 2.0 * u.values);
      DualFunctional F1 = p_laplacian_apply(u, c1);
      DualFunctional F2 = p_laplacian_apply(tu, c2);
      const double scale = std::pow(2.0, p - 1.0);
      for (Index id : dom->dof_nodes())
        if (!close_rel(F2.coeffs[id], scale * F1.coeffs[id], 1e-11))
          return false;
    }
    return true;
  });

  H.run("energy: smoothing bias bound", [&](std::string& d) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 16.0);
    std::mt19937_64 rng(31);
    GridFunction u = random_function(dom, rng);
    double worst = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
      EnergyConfig c;
      c.p = p;
      c.eps_reg = dom->spacing();
      const double eps = c.eps_reg;
      const double gap =
          std::abs(smoothed_dirichlet_energy(u, c) - dirichlet_energy(u, c));
      const double gmax = max_cell_gradient(u, c);
      const double area = static_cast<double>(dom->active_cells().size()) *
                          dom->cell_measure();
      const double bound = (p + 1.0) * eps *
                           std::pow(eps * eps + gmax * gmax, 0.5 * (p - 1.0)) *
                           area;
      worst = std::max(worst, gap / bound);
    }
    std::ostringstream ss;
    ss << "worst gap/bound " << worst;
    d = ss.str();
    return worst <= 1.0;
  });

  H.run("dual norm: constructed inverse, duality identities", [&](std::string& d) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 16.0);
    std::mt19937_64 rng(41);
    EnergyConfig c2;
    GridFunction g = random_function(dom, rng);
    DualFunctional F = p_laplacian_apply(g, c2);
    for (Index id : dom->dof_nodes()) F.coeffs[id] += g.values[id];
    DualNormResult r = dual_norm(F, c2);
    const double expect = sobolev_norm(g, c2);
    if (!close_rel(r.value, expect, 1e-10)) {
      d = "inverse reconstruction off";
      return false;
    }
    // optimality identities at the witness
    const double wn = sobolev_norm(r.witness, c2);
    if (!close_rel(F(r.witness), wn * wn, 1e-8)) return false;

    // zero functional
    DualFunctional Z{dom, ArrayXd::Zero(dom->num_nodes())};
    if (dual_norm(Z, c2).value != 0.0) return false;

    // iterative path agrees with the direct solve at p = 2
    EnergyConfig cit = c2;
    cit.dual_force_iterative = true;
    cit.dual_tol = 1e-11;
    DualNormResult rit = dual_norm(F, cit);
    if (!close_rel(rit.value, r.value, 1e-10)) {
      d = "iterative vs direct mismatch";
      return false;
    }
    return true;
  });

  H.run("dual norm: bounded by the dual Lebesgue norm", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 12.0);
    std::mt19937_64 rng(43);
    for (double p : {1.5, 2.0, 3.0}) {
      EnergyConfig c;
      c.p = p;
      const double pprime = p / (p - 1.0);
      for (int k = 0; k < 4; ++k) {
        GridFunction f = random_function(dom, rng);
        DualFunctional F{dom, f.values};
        const double dual = dual_norm(F, c).value;
        const double lpp = lp_norm(f, pprime);
        if (dual > lpp * (1.0 + 1e-6)) return false;
      }
    }
    return true;
  });

  // --- eigensolve --------------------------------------------------------
  H.run("eigen: interval eigenvalue (p=2)", [&](std::string& d) {
    EnergyConfig c2;
    const double lam =
        first_eigen(make_interval(0.5, 1.0 / 128.0), c2, SolveOptions{}).lambda;
    std::ostringstream ss;
    ss << "lambda " << lam;
    d = ss.str();
    return close_rel(lam, kPi * kPi, 1e-3);
  });

  H.run("eigen: square eigenvalue (p=2)", [&](std::string& d) {
    EnergyConfig c2;
    const double lam =
        first_eigen(make_rectangle(0.5, 0.5, 1.0 / 32.0), c2, SolveOptions{})
            .lambda;
    d = "lambda " + std::to_string(lam);
    return close_rel(lam, 2.0 * kPi * kPi, 1e-2);
  });

  H.run("eigen: grid scaling sends lambda to t^{-p} lambda",
        [&](std::string&) {
          for (double p : {2.0, 3.0}) {
            EnergyConfig c;
            c.p = p;
            const double h = 1.0 / 16.0;
            const double lam1 =
                first_eigen(make_rectangle(0.5, 0.5, h), c, SolveOptions{})
                    .lambda;
            const double lam2 =
                first_eigen(make_rectangle(1.0, 1.0, 2.0 * h), c,
                            SolveOptions{})
                    .lambda;
            if (!close_rel(lam2, lam1 / std::pow(2.0, p), 1e-12)) return false;
          }
          return true;
        });

  H.run("eigen: translation invariance of the mask", [&](std::string&) {
    const Index nx = 34, ny = 34;
    const double h = 1.0 / 16.0;
    const auto build = [&](Index si, Index sj) {
      std::vector<std::uint8_t> mask(nx * ny, 0);
      for (Index j = 0; j < 10; ++j)
        for (Index i = 0; i < 12; ++i)
          mask[(j + sj) * nx + (i + si)] = 1;
      return std::make_shared<GridDomain2D>(Vector2d(0, 0), h, nx, ny,
                                            std::move(mask));
    };
    EnergyConfig c2;
    const double a =
        first_eigen(DomainPtr(build(2, 3)), c2, SolveOptions{}).lambda;
    const double b =
        first_eigen(DomainPtr(build(9, 14)), c2, SolveOptions{}).lambda;
    return close_rel(a, b, 1e-12);
  });

  H.run("eigen: domain monotonicity on nested masks", [&](std::string&) {
    std::mt19937_64 rng(53);
    const Index nx = 26, ny = 26;
    const double h = 1.0 / 12.0;
    EnergyConfig c2;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<std::uint8_t> big(nx * ny, 0);
      for (Index j = 1; j + 1 < ny; ++j)
        for (Index i = 1; i + 1 < nx; ++i) big[j * nx + i] = 1;
      std::vector<std::uint8_t> small = big;
      const Index bi = 2 + static_cast<Index>(uniform01(rng) * (nx - 10));
      const Index bj = 2 + static_cast<Index>(uniform01(rng) * (ny - 10));
      const Index wi = 2 + static_cast<Index>(uniform01(rng) * 6);
      const Index wj = 2 + static_cast<Index>(uniform01(rng) * 6);
      for (Index j = bj; j < std::min(bj + wj, ny - 1); ++j)
        for (Index i = bi; i < std::min(bi + wi, nx - 1); ++i)
          small[j * nx + i] = 0;
      auto d2 = std::make_shared<GridDomain2D>(Vector2d(0, 0), h, nx, ny, big);
      auto d1 =
          std::make_shared<GridDomain2D>(Vector2d(0, 0), h, nx, ny, small);
      const double l2 = first_eigen(DomainPtr(d2), c2, SolveOptions{}).lambda;
      const double l1 = first_eigen(DomainPtr(d1), c2, SolveOptions{}).lambda;
      if (l1 < l2 - 1e-7 * std::max(1.0, l2)) return false;
    }
    return true;
  });

  H.run("eigen: weighted solve reductions", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 16.0);
    EnergyConfig c2;
    const EigenResult plain = first_eigen(dom, c2, SolveOptions{});
    const ArrayXd zeroV = ArrayXd::Zero(dom->num_nodes());
    const EigenResult wz = weighted_ground_state(dom, zeroV, c2, SolveOptions{});
    if (!close_rel(plain.lambda, wz.lambda, 1e-9)) return false;
    const ArrayXd constV = ArrayXd::Constant(dom->num_nodes(), 2.5);
    const EigenResult wc =
        weighted_ground_state(dom, constV, c2, SolveOptions{});
    return close_rel(wc.lambda, plain.lambda + 2.5, 1e-7);
  });

  H.run("eigen: energy identity and EL residual on acceptance",
        [&](std::string& d) {
          auto dom = make_rectangle(0.5, 0.5, 1.0 / 24.0);
          for (double p : {1.5, 2.0, 3.0}) {
            EnergyConfig c;
            c.p = p;
            SolveOptions o;
            const EigenResult r = first_eigen(dom, c, o);
            if (r.energy_gap > 10.0 * o.tol * std::max(1.0, r.lambda)) {
              d = "energy gap too large";
              return false;
            }
            if (r.el_residual > o.tol_el) {
              d = "el residual too large at p=" + std::to_string(p);
              return false;
            }
            double prev = r.lambda_trace.front();
            for (double v : r.lambda_trace) {
              if (v > prev + 1e-7 * std::max(1.0, std::abs(prev))) {
                d = "Rayleigh trace increased";
                return false;
              }
              prev = v;
            }
          }
          return true;
        });

  // --- strip -------------------------------------------------------------
  H.run("strip: reflected members are exact", [&](std::string& d) {
    StripConfig sc;
    sc.alpha = 0.5;
    sc.p = 3.0;
    sc.h = 1.0 / 16.0;
    sc.n_max = 3;
    const double thr = std::pow(pi_p(sc.p, sc.h), sc.p);
    sc.lambda_target = 2.0 * thr;
    ReflectedSequence seq = build_reflected(sc);
    EnergyConfig c;
    c.p = sc.p;
    double worst = 0.0;
    for (const auto& [n, u] : seq.members) {
      worst = std::max(worst, std::abs(lp_norm(u, sc.p) - 1.0));
      worst = std::max(
          worst, std::abs(dirichlet_energy(u, c) - seq.lambda) /
                     std::max(1.0, seq.lambda));
    }
    const double D0 = pohozaev_defect(seq.members[0].second, seq.lambda, c);
    for (const auto& [n, u] : seq.members)
      worst = std::max(worst, std::abs(pohozaev_defect(u, seq.lambda, c) - D0) /
                                  std::max(1.0, std::abs(D0)));
    std::ostringstream ss;
    ss << "worst defect " << worst;
    d = ss.str();
    return worst < 1e-10;
  });

  H.run("strip: x1-only profile cancels through the energy identity",
        [&](std::string&) {
          // For an x2-constant interior profile the defect reduces exactly to
          // the x2-gradient term (pinned rows at the truncation edge carry
          // all of it); the Rayleigh level cancels the rest to rounding.
          auto dom = make_rectangle(1.0, 0.5, 1.0 / 16.0);
          GridFunction u = sample(
              dom, [&](double x, double) { return std::cos(0.5 * kPi * x); });
          const GridDomain2D& g = *dom;
          for (Index j = 1; j + 1 < g.ny(); ++j)
            for (Index i = 1; i + 1 < g.nx(); ++i)
              if (g.interior(g.node(i, j)))
                u.values[g.node(i, j)] = u.values[g.node(i, 1)];
          EnergyConfig c2;
          const double lam = rayleigh_quotient(u, c2);
          const double D = pohozaev_defect(u, lam, c2);
          const double T2 = gradient_x2_term(u, c2);
          // bulk cells have no vertical variation at all
          const double h = g.spacing();
          for (const auto& c : g.active_cells()) {
            const Index jb = c.b / static_cast<std::int32_t>(g.nx());
            if (jb == 0 || jb + 2 == g.ny()) continue;
            if (u.values[c.t] != u.values[c.b] ||
                u.values[c.d] != u.values[c.r])
              return false;
          }
          (void)h;
          return std::abs(D - T2) < 1e-10 * std::max(1.0, std::abs(T2));
        });

  H.run("strip: trace inequality on random bumps", [&](std::string& d) {
    TraceCheckResult r = trace_check(0.5, 2.0, 20, 1.0 / 16.0);
    std::ostringstream ss;
    ss << "worst " << r.worst_ratio << " bound " << r.bound;
    d = ss.str();
    return r.worst_ratio <= r.bound + 10.0 / 16.0 * r.bound;
  });

  // --- weyl2 ---------------------------------------------------------------
  H.run("weyl2: exact eigenpair and perturbation response", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 16.0);
    EnergyConfig c2;
    SolveOptions o;
    o.tol = 1e-12;
    o.tol_el = 1e-9;
    const EigenResult r = first_eigen(dom, c2, o);
    WeylCorrection w0 = weyl_correct(r.u, r.lambda, c2);
    if (w0.strong_residual > 1e-6) return false;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
      WeylCorrection w = weyl_correct(r.u, r.lambda + delta, c2);
      if (!close_rel(w.strong_residual, delta, 2e-2)) return false;
      if (!close_rel(w.strong_residual, w.strong_residual_assembled, 1e-8))
        return false;
    }
    return true;
  });

  H.run("weyl2: corrector inequality and L2-vs-dual", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 12.0);
    EnergyConfig c2;
    std::mt19937_64 rng(61);
    for (int k = 0; k < 5; ++k) {
      GridFunction u = random_function(dom, rng);
      u.values /= lp_norm(u, 2.0);
      WeylCorrection w = weyl_correct(u, 5.0 + k, c2);
      DualFunctional h = w.h_n;
      const double rhs = dual_norm(h, c2).value;
      if (sobolev_norm(w.U_n, c2) > rhs + 1e-8 * std::max(1.0, rhs))
        return false;
    }
    GridFunction z(dom);
    auto [l2z, dz] = l2_vs_dual_check(z);
    if (l2z != 0.0 || dz != 0.0) return false;
    for (int k = 0; k < 5; ++k) {
      GridFunction f = random_function(dom, rng);
      auto [l2, dual] = l2_vs_dual_check(f);
      if (dual > l2 + 1e-8) return false;
    }
    return true;
  });

  // --- persson ---------------------------------------------------------------
  H.run("persson: bounded set sweeps to +inf", [&](std::string&) {
    auto base = make_rectangle(0.5, 0.5, 1.0 / 8.0);
    ExteriorFamily fam = [&](double R) { return make_exterior(base, R); };
    EnergyConfig c2;
    PerssonSweep sw = persson_sweep(fam, {0.0, 0.25, 2.0}, c2);
    return std::isinf(sw.e_p_estimate) && std::isfinite(sw.lambdas_raw[0]);
  });

  H.run("persson: strip sweep stays near the section level", [&](std::string& d) {
    const double h = 1.0 / 12.0;
    ExteriorFamily fam = strip_exterior_family(0.5, h, 8.0);
    EnergyConfig c2;
    PerssonSweep sw = persson_sweep(fam, {0.0, 1.0, 2.0}, c2, SolveOptions{},
                                    1, 8.0);
    for (std::size_t k = 0; k + 1 < sw.lambdas_raw.size(); ++k)
      if (sw.lambdas_raw[k] > sw.lambdas_raw[k + 1] + 1e-7) return false;
    // R = 0 equals the plain eigenvalue of the truncation
    const double lam0 =
        first_eigen(fam(0.0), c2, SolveOptions{}).lambda;
    if (!close_rel(lam0, sw.lambdas_raw[0], 1e-12)) return false;
    std::ostringstream ss;
    ss << "estimate " << sw.e_p_estimate;
    d = ss.str();
    return close_rel(sw.e_p_estimate, kPi * kPi, 0.12);
  });

  H.run("persson: classification verdicts", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 12.0);
    EnergyConfig c2;
    const EigenResult r = first_eigen(dom, c2, SolveOptions{});
    std::vector<GridFunction> constant(4, r.u);
    ClassifyOptions copt;
    copt.j_max = 3;
    if (classify_ps(constant, copt).verdict != PsVerdict::regular) return false;

    // marching bump inside a long box
    auto box = make_rectangle(0.5, 12.0, 0.25);
    std::vector<GridFunction> marching;
    for (int k = 1; k <= 4; ++k) {
      GridFunction u = sample(box, [&](double, double y) {
        const double t = (y - 2.5 * k) / 0.9;
        const double q = 1.0 - t * t;
        return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
      });
      u.values /= lp_norm(u, 2.0);
      marching.push_back(std::move(u));
    }
    ClassifyOptions mopt;
    mopt.j_max = 11;
    if (classify_ps(marching, mopt).verdict != PsVerdict::singular)
      return false;

    bool rejected = false;
    try {
      std::vector<GridFunction> zeros(3, GridFunction(dom));
      classify_ps(zeros, copt);
    } catch (const ParameterError&) {
      rejected = true;
    }
    return rejected;
  });

  H.run("grid: function round-trip keeps pinned zeros", [&](std::string&) {
    auto dom = make_rectangle(0.5, 0.5, 1.0 / 8.0);
    std::mt19937_64 rng(71);
    GridFunction u = random_function(dom, rng);
    const auto path = std::filesystem::temp_directory_path() /
                      "pspect_selfcheck_mask.grid";
    save_grid_function(u, path.string());
    GridFunction v = load_grid_function(path.string());
    std::filesystem::remove(path);
    for (Index id = 0; id < v.values.size(); ++id)
      if (!v.domain->interior(id) && v.values[id] != 0.0) return false;
    return true;
  });

  os << (H.all_ok ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT") << " ("
     << H.ran << " checks)\n";
  return H.all_ok;
}

} // namespace pspect
