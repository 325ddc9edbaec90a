// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_SRC_KERNELS_HPP
#define PSPECT_SRC_KERNELS_HPP

#include <cmath>

#include "pspect/energy.hpp"
#include "pspect/errors.hpp"
#include "pspect/grid.hpp"

namespace pspect::detail {

// t^{p/2} for t >= 0, with fast paths for the common exponents.
inline double pow_half(double t, double p) {
  if (p == 2.0) return t;
  if (p == 3.0) return t * std::sqrt(t);
  if (p == 4.0) return t * t;
  if (p == 1.5) return std::sqrt(t * std::sqrt(t));
  return std::pow(t, 0.5 * p);
}

// t^{(p-2)/2} for t >= 0 (t > 0 required when p < 2).
inline double pow_weight(double t, double p) {
  if (p == 2.0) return 1.0;
  if (p == 3.0) return std::sqrt(t);
  if (p == 4.0) return t;
  if (p == 1.5) return 1.0 / std::sqrt(std::sqrt(t));
  return std::pow(t, 0.5 * (p - 2.0));
}

// |u|^p
inline double abs_pow(double u, double p) {
  const double a = std::abs(u);
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  if (p == 4.0) {
    const double s = a * a;
    return s * s;
  }
  if (p == 1.5) return a * std::sqrt(a);
  return std::pow(a, p);
}

// |u|^{p-2} u, continuous at 0 for p > 1.
inline double signed_pow(double u, double p) {
  if (u == 0.0) return 0.0;
  const double a = std::abs(u);
  double m;
  if (p == 2.0)
    m = 1.0;
  else if (p == 3.0)
    m = a;
  else if (p == 4.0)
    m = a * a;
  else if (p == 1.5)
    m = 1.0 / std::sqrt(a);
  else
    m = std::pow(a, p - 2.0);
  return m * u;
}

struct CellSums {
  double plain = 0.0;
  double smoothed = 0.0;
};

// Chunked accumulator: positive-term sums stay accurate on large grids.
class ChunkSum {
 public:
  void add(double v) {
    chunk_ += v;
    if (++count_ == 4096) {
      total_ += chunk_;
      chunk_ = 0.0;
      count_ = 0;
    }
  }
  double value() const { return total_ + chunk_; }

 private:
  double total_ = 0.0, chunk_ = 0.0;
  int count_ = 0;
};

[[noreturn]] inline void throw_degenerate() {
  throw RegularizationRequiredError(
      "p < 2 with eps_reg = 0: exactly degenerate cell gradient; set "
      "eps_reg > 0");
}

// Core 2D cell pass.  Returns the plain and smoothed gradient integrals; if
// grad != nullptr, accumulates d/du of (1/p) * smoothed energy into it
// (caller zero-initializes; pinned-node entries are cleared by the caller).
template <bool WithGrad>
CellSums cell_pass(const GridDomain2D& dom, const double* v, double p,
                   double eps, CellQuadrature quad, double* grad) {
  const double h = dom.spacing();
  const double inv_h = 1.0 / h;
  const double e2 = eps * eps;
  const double ep = pow_half(e2, p);
  const bool guard = (p < 2.0 && eps == 0.0);
  ChunkSum plain_sum, smooth_sum;

  if (quad == CellQuadrature::corner_average) {
    const double w = 0.25 * dom.cell_measure();
    for (const auto& c : dom.active_cells()) {
      const double vb = v[c.b], vr = v[c.r], vt = v[c.t], vd = v[c.d];
      const double dxb = (vr - vb) * inv_h, dxt = (vd - vt) * inv_h;
      const double dyl = (vt - vb) * inv_h, dyr = (vd - vr) * inv_h;
      const double sLL = dxb * dxb + dyl * dyl;
      const double sLR = dxb * dxb + dyr * dyr;
      const double sUL = dxt * dxt + dyl * dyl;
      const double sUR = dxt * dxt + dyr * dyr;
      plain_sum.add(w * (pow_half(sLL, p) + pow_half(sLR, p) +
                         pow_half(sUL, p) + pow_half(sUR, p)));
      if (e2 != 0.0)
        smooth_sum.add(w * ((pow_half(e2 + sLL, p) - ep) +
                            (pow_half(e2 + sLR, p) - ep) +
                            (pow_half(e2 + sUL, p) - ep) +
                            (pow_half(e2 + sUR, p) - ep)));
      if constexpr (WithGrad) {
        if (guard && (sLL == 0.0 || sLR == 0.0 || sUL == 0.0 || sUR == 0.0))
          throw_degenerate();
        const double mLL = pow_weight(e2 + sLL, p);
        const double mLR = pow_weight(e2 + sLR, p);
        const double mUL = pow_weight(e2 + sUL, p);
        const double mUR = pow_weight(e2 + sUR, p);
        const double qxb = w * (mLL + mLR) * dxb;
        const double qxt = w * (mUL + mUR) * dxt;
        const double qyl = w * (mLL + mUL) * dyl;
        const double qyr = w * (mLR + mUR) * dyr;
        grad[c.b] -= (qxb + qyl) * inv_h;
        grad[c.r] += (qxb - qyr) * inv_h;
        grad[c.t] += (qyl - qxt) * inv_h;
        grad[c.d] += (qxt + qyr) * inv_h;
      }
    }
  } else {
    const double w = dom.cell_measure();
    for (const auto& c : dom.active_cells()) {
      const double vb = v[c.b], vr = v[c.r], vt = v[c.t];
      const double dx = (vr - vb) * inv_h;
      const double dy = (vt - vb) * inv_h;
      const double s = dx * dx + dy * dy;
      plain_sum.add(w * pow_half(s, p));
      if (e2 != 0.0) smooth_sum.add(w * (pow_half(e2 + s, p) - ep));
      if constexpr (WithGrad) {
        if (guard && s == 0.0) throw_degenerate();
        const double m = pow_weight(e2 + s, p);
        const double qx = w * m * dx;
        const double qy = w * m * dy;
        grad[c.b] -= (qx + qy) * inv_h;
        grad[c.r] += qx * inv_h;
        grad[c.t] += qy * inv_h;
      }
    }
  }
  CellSums out;
  out.plain = plain_sum.value();
  out.smoothed = (e2 != 0.0) ? smooth_sum.value() : out.plain;
  return out;
}

template <bool WithGrad>
CellSums cell_pass(const GridDomain1D& dom, const double* v, double p,
                   double eps, CellQuadrature /*quad*/, double* grad) {
  const double inv_h = 1.0 / dom.spacing();
  const double w = dom.cell_measure();
  const double e2 = eps * eps;
  const double ep = pow_half(e2, p);
  const bool guard = (p < 2.0 && eps == 0.0);
  ChunkSum plain_sum, smooth_sum;
  for (const auto& c : dom.active_cells()) {
    const double g = (v[c.r] - v[c.l]) * inv_h;
    const double s = g * g;
    plain_sum.add(w * pow_half(s, p));
    if (e2 != 0.0) smooth_sum.add(w * (pow_half(e2 + s, p) - ep));
    if constexpr (WithGrad) {
      if (guard && s == 0.0) throw_degenerate();
      const double q = w * pow_weight(e2 + s, p) * g;
      grad[c.l] -= q * inv_h;
      grad[c.r] += q * inv_h;
    }
  }
  CellSums out;
  out.plain = plain_sum.value();
  out.smoothed = (e2 != 0.0) ? smooth_sum.value() : out.plain;
  return out;
}

template <class Domain>
double lp_pow_sum(const Domain& dom, const double* v, double p) {
  ChunkSum s;
  for (Index id : dom.dof_nodes()) s.add(abs_pow(v[id], p));
  return s.value() * dom.cell_measure();
}

} // namespace pspect::detail

#endif
