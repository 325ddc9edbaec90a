// SPDX-License-Identifier: Apache-2.0
#include "pspect/cli.hpp"

int main(int argc, char** argv) { return pspect::cli::run(argc, argv); }
