// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_WEYL2_HPP
#define PSPECT_WEYL2_HPP

#include <utility>

#include "pspect/eigensolve.hpp"
#include "pspect/energy.hpp"
#include "pspect/grid.hpp"

namespace pspect {

// p = 2 consistency layer: upgrades a dual-norm-small defect to an L^2-small
// one by solving (-Delta + 1) U = h and renormalizing u - U.
struct WeylCorrection {
  DualFunctional h_n;  // -Delta u - lambda u as a functional
  GridFunction U_n;    // Helmholtz corrector
  GridFunction v_n;    // (u - U) / ||u - U||_2, unit L^2 norm
  double strong_residual = 0.0;            // (1+lambda)||U||_2 / ||u-U||_2
  double strong_residual_assembled = 0.0;  // ||-Delta v - lambda v||_2 directly
  double dual_norm_h = 0.0;                // ||h||_{W^{-1,2}} = ||U||_{W^{1,2}}
};

WeylCorrection weyl_correct(const GridFunction& u, double lambda,
                            const EnergyConfig& cfg);

// (||f||_{L^2}, ||f||_{W^{-1,2}}) of the functional with density f; the dual
// norm never exceeds the L^2 norm.
std::pair<double, double> l2_vs_dual_check(const GridFunction& f);

} // namespace pspect

#endif
