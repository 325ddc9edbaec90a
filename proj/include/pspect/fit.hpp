// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_FIT_HPP
#define PSPECT_FIT_HPP

#include <vector>

namespace pspect {

// Least-squares slope of log(y) against log(x); entries with nonpositive
// x or y are skipped.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace pspect

#endif
