// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_PARALLEL_HPP
#define PSPECT_PARALLEL_HPP

#include <functional>

#include "pspect/types.hpp"

namespace pspect {

// Worker count from PERSSON_SPECT_JOBS, else hardware concurrency.
int default_jobs();

// Runs body(i) for i in [0, n) on up to `jobs` threads (dynamic scheduling).
// body must write only to per-index state; the first exception is rethrown
// after all workers join.
void parallel_for(Index n, int jobs, const std::function<void(Index)>& body);

} // namespace pspect

#endif
