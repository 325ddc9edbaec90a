// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_ERRORS_HPP
#define PSPECT_ERRORS_HPP

#include <memory>
#include <stdexcept>
#include <string>

#include "pspect/types.hpp"

namespace pspect {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid parameter values (non-positive spacing, bad exponent, ...).
struct ParameterError : Error {
  using Error::Error;
};

/// Grid too coarse (or empty) for the requested construction.
struct ResolutionError : Error {
  using Error::Error;
};

/// A computation is ill-posed on the given input (zero function, level below
/// the spectral threshold, ...).
struct DomainError : Error {
  using Error::Error;
};

/// p < 2 gradient kernel hit an exactly degenerate cell with eps_reg == 0.
struct RegularizationRequiredError : Error {
  using Error::Error;
};

/// Grid spacing incompatible with an exact reflection map.
struct AlignmentError : Error {
  AlignmentError(const std::string& what, double suggested)
      : Error(what), suggested_h(suggested) {}
  double suggested_h;
};

/// Run configuration inconsistent with the requested computation.
struct ConfigError : Error {
  using Error::Error;
};

/// Operation restricted to a specific exponent (e.g. the p = 2 layer).
struct UnsupportedExponentError : Error {
  using Error::Error;
};

/// Degenerate input inside an otherwise valid computation.
struct DegenerateInputError : Error {
  using Error::Error;
};

/// Iterative solve did not converge; carries the state at abort time.
struct SolverError : Error {
  SolverError(const std::string& what, double last_value, double last_residual,
              int iterations,
              std::shared_ptr<const ArrayXd> last_iterate = nullptr)
      : Error(what),
        last_value(last_value),
        last_residual(last_residual),
        iterations(iterations),
        last_iterate(std::move(last_iterate)) {}
  double last_value;
  double last_residual;
  int iterations;
  std::shared_ptr<const ArrayXd> last_iterate;
};

} // namespace pspect

#endif
