// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_SELFCHECK_HPP
#define PSPECT_SELFCHECK_HPP

#include <iosfwd>

namespace pspect {

// Runs the whole invariant suite on tiny grids, printing one line per check.
// Returns true when every check passes.
bool run_self_checks(std::ostream& os);

} // namespace pspect

#endif
