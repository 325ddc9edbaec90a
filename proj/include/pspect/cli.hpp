// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_CLI_HPP
#define PSPECT_CLI_HPP

namespace pspect::cli {

// Batch driver: subcommands eig, persson, strip, weyl, check.
// Exit codes: 0 success, 1 validation error, 2 solver failure, 64 usage.
int run(int argc, const char* const* argv);

} // namespace pspect::cli

#endif
