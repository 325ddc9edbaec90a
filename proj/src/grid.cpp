// SPDX-License-Identifier: Apache-2.0
#include "pspect/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pspect {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ParameterError(msg);
}

} // namespace

GridDomain2D::GridDomain2D(const Vector2d& origin, double h, Index nx,
                           Index ny, std::vector<std::uint8_t> interior)
    : origin_(origin), h_(h), nx_(nx), ny_(ny), interior_(std::move(interior)) {
  require(h_ > 0.0, "GridDomain2D: spacing must be positive");
  require(nx_ >= 3 && ny_ >= 3, "GridDomain2D: need at least 3 nodes per axis");
  require(static_cast<Index>(interior_.size()) == nx_ * ny_,
          "GridDomain2D: mask size mismatch");

  dof_of_.assign(static_cast<std::size_t>(nx_ * ny_), -1);
  bbox_ = {nx_, -1, ny_, -1};
  for (Index j = 0; j < ny_; ++j)
    for (Index i = 0; i < nx_; ++i) {
      const Index id = node(i, j);
      if (!interior_[id]) continue;
      if (i < 1 || i > nx_ - 2 || j < 1 || j > ny_ - 2)
        throw ParameterError(
            "GridDomain2D: interior node lacks a full stencil neighborhood");
      dof_of_[id] = static_cast<Index>(dof_nodes_.size());
      dof_nodes_.push_back(id);
      bbox_[0] = std::min(bbox_[0], i);
      bbox_[1] = std::max(bbox_[1], i);
      bbox_[2] = std::min(bbox_[2], j);
      bbox_[3] = std::max(bbox_[3], j);
    }
  if (dof_nodes_.empty())
    throw ResolutionError("GridDomain2D: interior mask is empty");

  cells_.reserve(static_cast<std::size_t>((nx_ - 1) * (ny_ - 1)));
  for (Index j = 0; j + 1 < ny_; ++j)
    for (Index i = 0; i + 1 < nx_; ++i) {
      const Index b = node(i, j), r = node(i + 1, j);
      const Index t = node(i, j + 1), d = node(i + 1, j + 1);
      if (interior_[b] || interior_[r] || interior_[t] || interior_[d])
        cells_.push_back({static_cast<std::int32_t>(b),
                          static_cast<std::int32_t>(r),
                          static_cast<std::int32_t>(t),
                          static_cast<std::int32_t>(d)});
    }
}

GridDomain1D::GridDomain1D(double origin, double h, Index n,
                           std::vector<std::uint8_t> interior)
    : origin_(origin), h_(h), n_(n), interior_(std::move(interior)) {
  require(h_ > 0.0, "GridDomain1D: spacing must be positive");
  require(n_ >= 3, "GridDomain1D: need at least 3 nodes");
  require(static_cast<Index>(interior_.size()) == n_,
          "GridDomain1D: mask size mismatch");

  dof_of_.assign(static_cast<std::size_t>(n_), -1);
  bbox_ = {n_, -1};
  for (Index i = 0; i < n_; ++i) {
    if (!interior_[i]) continue;
    if (i < 1 || i > n_ - 2)
      throw ParameterError(
          "GridDomain1D: interior node lacks a full stencil neighborhood");
    dof_of_[i] = static_cast<Index>(dof_nodes_.size());
    dof_nodes_.push_back(i);
    bbox_[0] = std::min(bbox_[0], i);
    bbox_[1] = std::max(bbox_[1], i);
  }
  if (dof_nodes_.empty())
    throw ResolutionError("GridDomain1D: interior mask is empty");

  for (Index i = 0; i + 1 < n_; ++i)
    if (interior_[i] || interior_[i + 1])
      cells_.push_back(
          {static_cast<std::int32_t>(i), static_cast<std::int32_t>(i + 1)});
}

Index cells_spanning(double length, double h) {
  const double raw = length / h;
  return std::max<Index>(1, static_cast<Index>(std::ceil(raw * (1.0 - 1e-12))));
}

namespace {

// Number of distinct interior columns / rows in a 2D mask.
std::pair<Index, Index> interior_axis_counts(const GridDomain2D& d) {
  std::vector<std::uint8_t> col(static_cast<std::size_t>(d.nx()), 0);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(d.ny()), 0);
  for (Index j = 0; j < d.ny(); ++j)
    for (Index i = 0; i < d.nx(); ++i)
      if (d.interior(d.node(i, j))) {
        col[i] = 1;
        row[j] = 1;
      }
  const auto count = [](const std::vector<std::uint8_t>& v) {
    Index c = 0;
    for (auto b : v) c += b;
    return c;
  };
  return {count(col), count(row)};
}

} // namespace

DomainPtr make_rectangle(double alpha, double T, double h) {
  if (!(alpha > 0.0) || !(T > 0.0) || !(h > 0.0))
    throw ParameterError("make_rectangle: alpha, T, h must be positive");
  if (2.0 * alpha / h < 2.0 || 2.0 * T / h < 2.0)
    throw ResolutionError("make_rectangle: fewer than 2 cells per axis");

  const Index ncx = cells_spanning(2.0 * alpha, h);
  const Index ncy = cells_spanning(2.0 * T, h);
  const Index nx = ncx + 1, ny = ncy + 1;
  const Vector2d origin(-alpha, -T);
  const double tol = 1e-9 * h;

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx * ny), 0);
  for (Index j = 1; j + 1 < ny; ++j)
    for (Index i = 1; i + 1 < nx; ++i) {
      const double xv = origin.x() + static_cast<double>(i) * h;
      const double yv = origin.y() + static_cast<double>(j) * h;
      if (std::abs(xv) < alpha - tol && std::abs(yv) < T - tol)
        mask[static_cast<std::size_t>(j * nx + i)] = 1;
    }

  DomainPtr dom;
  try {
    dom = std::make_shared<GridDomain2D>(origin, h, nx, ny, std::move(mask));
  } catch (const ResolutionError&) {
    throw ResolutionError("make_rectangle: grid too coarse (empty interior)");
  }
  const auto [cols, rows] = interior_axis_counts(*dom);
  if (cols < 3 || rows < 3)
    throw ResolutionError(
        "make_rectangle: fewer than 3 interior nodes per axis");
  return dom;
}

DomainPtr1D make_interval(double half_width, double h) {
  if (!(half_width > 0.0) || !(h > 0.0))
    throw ParameterError("make_interval: half_width, h must be positive");
  const Index nc = cells_spanning(2.0 * half_width, h);
  const Index n = nc + 1;
  const double origin = -half_width;
  const double tol = 1e-9 * h;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
  Index count = 0;
  for (Index i = 1; i + 1 < n; ++i) {
    const double xv = origin + static_cast<double>(i) * h;
    if (std::abs(xv) < half_width - tol) {
      mask[static_cast<std::size_t>(i)] = 1;
      ++count;
    }
  }
  if (count < 3)
    throw ResolutionError("make_interval: fewer than 3 interior nodes");
  return std::make_shared<GridDomain1D>(origin, h, n, std::move(mask));
}

DomainPtr make_exterior(const DomainPtr& base, double R,
                        const Vector2d& center) {
  if (R < 0.0) throw ParameterError("make_exterior: R must be nonnegative");
  if (R == 0.0) return base;
  const GridDomain2D& d = *base;
  std::vector<std::uint8_t> mask = d.interior_mask();
  const double R2 = R * R;
  for (Index id = 0; id < d.num_nodes(); ++id)
    if (mask[id] && d.radius2(id, center) <= R2) mask[id] = 0;
  return std::make_shared<GridDomain2D>(d.origin(), d.spacing(), d.nx(), d.ny(),
                                        std::move(mask));
}

DomainPtr intersect_ball(const DomainPtr& base, double rho,
                         const Vector2d& center) {
  if (!(rho > 0.0)) throw ParameterError("intersect_ball: rho must be positive");
  const GridDomain2D& d = *base;
  std::vector<std::uint8_t> mask = d.interior_mask();
  const double rho2 = rho * rho;
  for (Index id = 0; id < d.num_nodes(); ++id)
    if (mask[id] && d.radius2(id, center) >= rho2) mask[id] = 0;
  return std::make_shared<GridDomain2D>(d.origin(), d.spacing(), d.nx(), d.ny(),
                                        std::move(mask));
}

DomainPtr with_mask(const DomainPtr& base, std::vector<std::uint8_t> mask) {
  const GridDomain2D& d = *base;
  return std::make_shared<GridDomain2D>(d.origin(), d.spacing(), d.nx(), d.ny(),
                                        std::move(mask));
}

double ball_mass(const GridFunction& u, double R, double p,
                 const Vector2d& center) {
  if (!(p > 1.0)) throw ParameterError("ball_mass: p must exceed 1");
  if (R < 0.0) throw ParameterError("ball_mass: R must be nonnegative");
  if (R == 0.0) return 0.0;
  const GridDomain2D& d = *u.domain;
  const double R2 = R * R;
  double sum = 0.0;
  for (Index id : d.dof_nodes())
    if (d.radius2(id, center) < R2)
      sum += std::pow(std::abs(u.values[id]), p);
  return std::pow(sum * d.cell_measure(), 1.0 / p);
}

GridFunction make_zero(DomainPtr dom) { return GridFunction(std::move(dom)); }
GridFunction1D make_zero(DomainPtr1D dom) {
  return GridFunction1D(std::move(dom));
}

namespace {

template <class Domain>
void validate_impl(const BasicGridFunction<Domain>& u) {
  if (!u.domain) throw ParameterError("GridFunction: null domain");
  if (u.values.size() != u.domain->num_nodes())
    throw ParameterError("GridFunction: value count mismatch");
  for (Index id = 0; id < u.values.size(); ++id) {
    if (!std::isfinite(u.values[id]))
      throw ParameterError("GridFunction: non-finite value");
    if (!u.domain->interior(id) && u.values[id] != 0.0)
      throw ParameterError("GridFunction: nonzero value at pinned node");
  }
}

} // namespace

void validate(const GridFunction& u) { validate_impl(u); }
void validate(const GridFunction1D& u) { validate_impl(u); }

GridFunction embed_zero(const GridFunction& u, const DomainPtr& big) {
  const GridDomain2D& s = *u.domain;
  const GridDomain2D& b = *big;
  if (std::abs(s.spacing() - b.spacing()) > 1e-12 * s.spacing())
    throw ParameterError("embed_zero: spacing mismatch");
  const double h = s.spacing();
  const double dx = (s.origin().x() - b.origin().x()) / h;
  const double dy = (s.origin().y() - b.origin().y()) / h;
  const Index oi = static_cast<Index>(std::llround(dx));
  const Index oj = static_cast<Index>(std::llround(dy));
  if (std::abs(dx - static_cast<double>(oi)) > 1e-6 ||
      std::abs(dy - static_cast<double>(oj)) > 1e-6)
    throw ParameterError("embed_zero: grids are not aligned to whole cells");

  GridFunction out(big);
  for (Index j = 0; j < s.ny(); ++j)
    for (Index i = 0; i < s.nx(); ++i) {
      const double v = u.values[s.node(i, j)];
      if (v == 0.0) continue;
      const Index bi = i + oi, bj = j + oj;
      if (bi < 0 || bi >= b.nx() || bj < 0 || bj >= b.ny())
        throw ParameterError("embed_zero: support exceeds the target grid");
      const Index id = b.node(bi, bj);
      if (!b.interior(id))
        throw ParameterError("embed_zero: support hits a pinned target node");
      out.values[id] = v;
    }
  return out;
}

} // namespace pspect
