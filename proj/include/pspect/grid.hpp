// SPDX-License-Identifier: Apache-2.0
#ifndef PSPECT_GRID_HPP
#define PSPECT_GRID_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "pspect/errors.hpp"
#include "pspect/types.hpp"

namespace pspect {

// Node-centered rectilinear grid over a planar Dirichlet domain.  The domain
// is encoded by the interior mask: true nodes are unknowns, false nodes are
// pinned to zero (extension by zero outside the open set).  Immutable after
// construction and safe to share across threads.
class GridDomain2D {
 public:
  struct Cell {
    // Node indices of the cell corners: base (i,j), right (i+1,j),
    // top (i,j+1), diagonal (i+1,j+1).
    std::int32_t b, r, t, d;
  };

  GridDomain2D(const Vector2d& origin, double h, Index nx, Index ny,
               std::vector<std::uint8_t> interior);

  static constexpr int dim = 2;

  double spacing() const { return h_; }
  double cell_measure() const { return h_ * h_; }
  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index num_nodes() const { return nx_ * ny_; }
  const Vector2d& origin() const { return origin_; }

  Index node(Index i, Index j) const { return j * nx_ + i; }
  double x(Index i) const { return origin_.x() + static_cast<double>(i) * h_; }
  double y(Index j) const { return origin_.y() + static_cast<double>(j) * h_; }
  Vector2d coords(Index node_id) const {
    return {x(node_id % nx_), y(node_id / nx_)};
  }
  double radius2(Index node_id, const Vector2d& center = {0.0, 0.0}) const {
    const Vector2d q = coords(node_id) - center;
    return q.squaredNorm();
  }

  bool interior(Index node_id) const { return interior_[node_id] != 0; }
  const std::vector<std::uint8_t>& interior_mask() const { return interior_; }
  Index interior_count() const { return static_cast<Index>(dof_nodes_.size()); }

  // Cells with at least one interior corner, in row-major order.
  const std::vector<Cell>& active_cells() const { return cells_; }

  // Interior nodes in row-major order; dof_of(node) is -1 for pinned nodes.
  const std::vector<Index>& dof_nodes() const { return dof_nodes_; }
  Index dof_of(Index node_id) const { return dof_of_[node_id]; }

  // Index bounding box of the interior mask: {i_min, i_max, j_min, j_max}.
  const std::array<Index, 4>& interior_bbox() const { return bbox_; }

 private:
  Vector2d origin_;
  double h_;
  Index nx_, ny_;
  std::vector<std::uint8_t> interior_;
  std::vector<Cell> cells_;
  std::vector<Index> dof_nodes_;
  std::vector<Index> dof_of_;
  std::array<Index, 4> bbox_;
};

// 1D analog over an interval.
class GridDomain1D {
 public:
  struct Cell {
    std::int32_t l, r;
  };

  GridDomain1D(double origin, double h, Index n,
               std::vector<std::uint8_t> interior);

  static constexpr int dim = 1;

  double spacing() const { return h_; }
  double cell_measure() const { return h_; }
  Index num_nodes() const { return n_; }
  double origin() const { return origin_; }
  double x(Index i) const { return origin_ + static_cast<double>(i) * h_; }

  bool interior(Index node_id) const { return interior_[node_id] != 0; }
  const std::vector<std::uint8_t>& interior_mask() const { return interior_; }
  Index interior_count() const { return static_cast<Index>(dof_nodes_.size()); }

  const std::vector<Cell>& active_cells() const { return cells_; }
  const std::vector<Index>& dof_nodes() const { return dof_nodes_; }
  Index dof_of(Index node_id) const { return dof_of_[node_id]; }
  const std::array<Index, 2>& interior_bbox() const { return bbox_; }

 private:
  double origin_;
  double h_;
  Index n_;
  std::vector<std::uint8_t> interior_;
  std::vector<Cell> cells_;
  std::vector<Index> dof_nodes_;
  std::vector<Index> dof_of_;
  std::array<Index, 2> bbox_;
};

using DomainPtr = std::shared_ptr<const GridDomain2D>;
using DomainPtr1D = std::shared_ptr<const GridDomain1D>;

// Nodal values of a scalar field; exactly zero at pinned nodes.
template <class Domain>
struct BasicGridFunction {
  std::shared_ptr<const Domain> domain;
  ArrayXd values;

  BasicGridFunction() = default;
  explicit BasicGridFunction(std::shared_ptr<const Domain> dom)
      : domain(std::move(dom)), values(ArrayXd::Zero(domain->num_nodes())) {}
  BasicGridFunction(std::shared_ptr<const Domain> dom, ArrayXd vals)
      : domain(std::move(dom)), values(std::move(vals)) {}
};

using GridFunction = BasicGridFunction<GridDomain2D>;
using GridFunction1D = BasicGridFunction<GridDomain1D>;

// Number of cells spanning a length L at spacing h, robust to fp droop on
// aligned inputs.
Index cells_spanning(double length, double h);

// Open rectangle (-alpha, alpha) x (-T, T); mask = nodes strictly inside.
DomainPtr make_rectangle(double alpha, double T, double h);

// Open interval (-half_width, half_width).
DomainPtr1D make_interval(double half_width, double h);

// Copy of `base` whose mask additionally excludes nodes with |x - center| <= R.
// R == 0 leaves the mask unchanged (a point has zero capacity).
DomainPtr make_exterior(const DomainPtr& base, double R,
                        const Vector2d& center = {0.0, 0.0});

// Copy of `base` restricted to the open ball |x - center| < rho.
DomainPtr intersect_ball(const DomainPtr& base, double rho,
                         const Vector2d& center = {0.0, 0.0});

// Copy of `base` with a replacement mask (validated against the grid).
DomainPtr with_mask(const DomainPtr& base, std::vector<std::uint8_t> mask);

// Discrete L^p norm of u restricted to the open ball B_R.
double ball_mass(const GridFunction& u, double R, double p,
                 const Vector2d& center = {0.0, 0.0});

// Zero everywhere.
GridFunction make_zero(DomainPtr dom);
GridFunction1D make_zero(DomainPtr1D dom);

// Sample f(x, y) at interior nodes, zero elsewhere.
template <class F>
GridFunction sample(DomainPtr dom, F&& f) {
  GridFunction u(std::move(dom));
  const GridDomain2D& d = *u.domain;
  for (Index j = 0; j < d.ny(); ++j)
    for (Index i = 0; i < d.nx(); ++i) {
      const Index id = d.node(i, j);
      if (d.interior(id)) u.values[id] = f(d.x(i), d.y(j));
    }
  return u;
}

template <class F>
GridFunction1D sample(DomainPtr1D dom, F&& f) {
  GridFunction1D u(std::move(dom));
  const GridDomain1D& d = *u.domain;
  for (Index i = 0; i < d.num_nodes(); ++i)
    if (d.interior(i)) u.values[i] = f(d.x(i));
  return u;
}

// Checks finiteness and the zero-outside-mask invariant; throws on violation.
void validate(const GridFunction& u);
void validate(const GridFunction1D& u);

// Zero-extends `u` into `big`; node coordinates must match up to whole cells.
GridFunction embed_zero(const GridFunction& u, const DomainPtr& big);

} // namespace pspect

#endif
