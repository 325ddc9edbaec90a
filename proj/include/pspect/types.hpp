// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_TYPES_HPP
#define PSPECT_TYPES_HPP

#include <Eigen/Core>
#include <cstdint>

namespace pspect {

using Scalar = double;
using Index = Eigen::Index;
using ArrayXd = Eigen::ArrayXd;
using VectorXd = Eigen::VectorXd;
using Vector2d = Eigen::Vector2d;

} // namespace pspect

#endif
