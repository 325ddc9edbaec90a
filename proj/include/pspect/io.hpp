// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_IO_HPP
#define PSPECT_IO_HPP

#include <string>

#include "pspect/energy.hpp"
#include "pspect/grid.hpp"

namespace pspect {

// On-disk format: a one-line JSON header (origin, h, node counts), then the
// node values in row-major order as CSV lines of decimal literals printed
// with 17 significant digits (bit-exact round trip), then the 0/1 mask as
// CSV lines.

void save_grid_function(const GridFunction& u, const std::string& path);
void save_grid_function(const GridFunction1D& u, const std::string& path);
GridFunction load_grid_function(const std::string& path);
GridFunction1D load_grid_function_1d(const std::string& path);

void save_dual_functional(const DualFunctional& F, const std::string& path);
DualFunctional load_dual_functional(const std::string& path);

// Formats a double with round-trip precision (shared by the CSV writers).
std::string format_double(double v);

} // namespace pspect

#endif
