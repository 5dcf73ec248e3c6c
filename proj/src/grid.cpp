// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "onelap/error.hpp"
#include "onelap/parallel.hpp"

namespace onelap {

namespace {

void check_dim(int dim) {
  if (dim < 2 || dim > Grid::kMaxDim)
    throw ContractViolation("grid dimension must lie in [2, 8], got " +
                            std::to_string(dim));
}

}  // namespace

std::shared_ptr<const Grid> Grid::ball(int dim, double radius, int cells_across,
                                       std::vector<double> center) {
  check_dim(dim);
  require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive");
  require(cells_across >= 1, "ball needs at least one cell across");
  if (center.empty()) center.assign(static_cast<std::size_t>(dim), 0.0);
  require(center.size() == static_cast<std::size_t>(dim), "ball center has wrong dimension");

  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = dim;
  g->h_ = 2.0 * radius / cells_across;
  g->shape_.assign(static_cast<std::size_t>(dim), cells_across + 2);
  g->origin_.resize(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) g->origin_[k] = center[k] - radius - g->h_;
  g->domain_kind_ = DomainKind::Ball;
  g->ball_ = BallShape{center, radius};

  std::size_t total = 1;
  for (int s : g->shape_) total *= static_cast<std::size_t>(s);
  g->kinds_.assign(total, CellKind::Exterior);
  g->strides_.assign(static_cast<std::size_t>(dim), 1);
  for (int k = dim - 2; k >= 0; --k) g->strides_[k] = g->strides_[k + 1] * g->shape_[k + 1];

  // Ties (center exactly on the sphere) count as interior; the relative slack
  // absorbs rounding in the center coordinates.
  const double r2 = radius * radius * (1.0 + 1e-12);
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (std::size_t c = 0; c < total; ++c) {
    g->center(c, x);
    double d2 = 0.0;
    for (int k = 0; k < dim; ++k) d2 += (x[k] - center[k]) * (x[k] - center[k]);
    if (d2 <= r2) g->kinds_[c] = CellKind::Interior;
  }
  g->finalize();
  return g;
}

std::shared_ptr<const Grid> Grid::box(int dim, double lower, double upper, int cells_per_axis) {
  check_dim(dim);
  require(upper > lower, "box needs upper > lower");
  require(cells_per_axis >= 1, "box needs at least one cell per axis");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = dim;
  g->h_ = (upper - lower) / cells_per_axis;
  g->shape_.assign(static_cast<std::size_t>(dim), cells_per_axis + 2);
  g->origin_.assign(static_cast<std::size_t>(dim), lower - g->h_);
  g->domain_kind_ = DomainKind::Box;
  std::size_t total = 1;
  for (int s : g->shape_) total *= static_cast<std::size_t>(s);
  g->kinds_.assign(total, CellKind::Exterior);
  g->strides_.assign(static_cast<std::size_t>(dim), 1);
  for (int k = dim - 2; k >= 0; --k) g->strides_[k] = g->strides_[k + 1] * g->shape_[k + 1];
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (std::size_t c = 0; c < total; ++c) {
    g->index_of(c, idx);
    bool inside = true;
    for (int k = 0; k < dim; ++k) inside = inside && idx[k] >= 1 && idx[k] <= cells_per_axis;
    if (inside) g->kinds_[c] = CellKind::Interior;
  }
  g->finalize();
  return g;
}

std::shared_ptr<const Grid> Grid::from_mask(std::vector<int> shape, double spacing,
                                            std::vector<double> origin,
                                            std::vector<CellKind> kinds) {
  check_dim(static_cast<int>(shape.size()));
  require(spacing > 0.0 && std::isfinite(spacing), "grid spacing must be positive");
  for (int s : shape) require(s >= 3, "every shape component must be >= 3");
  const int dim = static_cast<int>(shape.size());
  if (origin.empty()) {
    origin.resize(shape.size());
    for (int k = 0; k < dim; ++k) origin[k] = -0.5 * spacing * shape[k];
  }
  require(origin.size() == shape.size(), "origin has wrong dimension");
  std::size_t total = 1;
  for (int s : shape) total *= static_cast<std::size_t>(s);
  require(kinds.size() == total, "mask size does not match shape");

  auto g = std::shared_ptr<Grid>(new Grid());
  g->dim_ = dim;
  g->h_ = spacing;
  g->shape_ = std::move(shape);
  g->origin_ = std::move(origin);
  g->domain_kind_ = DomainKind::Custom;
  g->kinds_ = std::move(kinds);
  g->strides_.assign(static_cast<std::size_t>(dim), 1);
  for (int k = dim - 2; k >= 0; --k) g->strides_[k] = g->strides_[k + 1] * g->shape_[k + 1];
  g->finalize();
  return g;
}

void Grid::finalize() {
  const std::size_t total = kinds_.size();
  std::vector<int> idx(static_cast<std::size_t>(dim_));

  // Interior cells must not touch the array edge, so the collar fits.
  for (std::size_t c = 0; c < total; ++c) {
    if (kinds_[c] != CellKind::Interior) continue;
    index_of(c, idx);
    for (int k = 0; k < dim_; ++k) {
      if (idx[k] == 0 || idx[k] == shape_[k] - 1) {
        std::ostringstream os;
        os << "interior cell " << c << " lies on the array edge; no room for the boundary collar";
        throw ContractViolation(os.str());
      }
    }
  }
  for (std::size_t c = 0; c < total; ++c) {
    if (kinds_[c] != CellKind::Interior) continue;
    for (int k = 0; k < dim_; ++k) {
      for (std::ptrdiff_t s : {strides_[k], -strides_[k]}) {
        const auto n = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) + s);
        if (kinds_[n] == CellKind::Exterior) kinds_[n] = CellKind::Boundary;
      }
    }
  }

  links_.assign(total, 0);
  active_.clear();
  interior_.clear();
  boundary_.clear();
  for (std::size_t c = 0; c < total; ++c) {
    if (kinds_[c] == CellKind::Exterior) continue;
    active_.push_back(static_cast<std::uint32_t>(c));
    (kinds_[c] == CellKind::Interior ? interior_ : boundary_).push_back(static_cast<std::uint32_t>(c));
    index_of(c, idx);
    std::uint8_t bits = 0;
    for (int k = 0; k < dim_; ++k) {
      if (idx[k] + 1 < shape_[k] && kinds_[c + static_cast<std::size_t>(strides_[k])] != CellKind::Exterior)
        bits |= static_cast<std::uint8_t>(1u << k);
    }
    links_[c] = bits;
  }
  cell_volume_ = std::pow(h_, dim_);
  face_area_ = std::pow(h_, dim_ - 1);
}

void Grid::index_of(std::size_t c, std::span<int> idx) const {
  for (int k = 0; k < dim_; ++k) {
    idx[k] = static_cast<int>(c / static_cast<std::size_t>(strides_[k]));
    c -= static_cast<std::size_t>(idx[k]) * static_cast<std::size_t>(strides_[k]);
  }
}

std::size_t Grid::linear(std::span<const int> idx) const {
  std::size_t c = 0;
  for (int k = 0; k < dim_; ++k) c += static_cast<std::size_t>(idx[k]) * static_cast<std::size_t>(strides_[k]);
  return c;
}

void Grid::center(std::size_t c, std::span<double> x) const {
  for (int k = 0; k < dim_; ++k) {
    const auto i = c / static_cast<std::size_t>(strides_[k]);
    c -= i * static_cast<std::size_t>(strides_[k]);
    x[k] = origin_[k] + (static_cast<double>(i) + 0.5) * h_;
  }
}

double Grid::center_coord(std::size_t c, int axis) const {
  const auto i = (c / static_cast<std::size_t>(strides_[axis])) % static_cast<std::size_t>(shape_[axis]);
  return origin_[axis] + (static_cast<double>(i) + 0.5) * h_;
}

bool Grid::same_layout(const Grid& o) const {
  return this == &o || (dim_ == o.dim_ && shape_ == o.shape_ && h_ == o.h_ && kinds_ == o.kinds_);
}

ScalarField::ScalarField(GridPtr grid, double value) : grid_(std::move(grid)) {
  require(grid_ != nullptr, "field needs a grid");
  v_.assign(grid_->size(), 0.0);
  for (std::uint32_t c : grid_->active_cells()) v_[c] = value;
}

VectorField::VectorField(GridPtr grid, double value) : grid_(std::move(grid)) {
  require(grid_ != nullptr, "field needs a grid");
  v_.assign(grid_->size() * static_cast<std::size_t>(grid_->dim()), value);
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_layout(b)) throw ContractViolation(std::string(what) + ": fields live on different grids");
}

VectorField gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  VectorField out(u.grid_ptr());
  const int dim = g.dim();
  const double inv_h = 1.0 / g.spacing();
  const auto& cells = g.active_cells();
  detail::parallel_for(cells.size(), [&](std::size_t i) {
    const std::size_t c = cells[i];
    double* gc = out.at(c);
    const std::uint8_t bits = g.links(c);
    for (int k = 0; k < dim; ++k)
      gc[k] = ((bits >> k) & 1u) ? (u[c + static_cast<std::size_t>(g.stride(k))] - u[c]) * inv_h : 0.0;
  });
  return out;
}

ScalarField divergence(const VectorField& z) {
  const Grid& g = z.grid();
  ScalarField out(z.grid_ptr());
  const int dim = g.dim();
  const double inv_h = 1.0 / g.spacing();
  const auto& cells = g.active_cells();
  detail::parallel_for(cells.size(), [&](std::size_t i) {
    const std::size_t c = cells[i];
    const std::uint8_t bits = g.links(c);
    const double* zc = z.at(c);
    double d = 0.0;
    for (int k = 0; k < dim; ++k) {
      if ((bits >> k) & 1u) d += zc[k];
      const std::ptrdiff_t s = g.stride(k);
      if (static_cast<std::ptrdiff_t>(c) >= s) {
        const std::size_t b = c - static_cast<std::size_t>(s);
        if (g.has_link(b, k) && g.in_mask(b)) d -= z.at(b)[k];
      }
    }
    out[c] = d * inv_h;
  });
  return out;
}

double gradient_norm_at(const ScalarField& u, std::size_t c) {
  const Grid& g = u.grid();
  const std::uint8_t bits = g.links(c);
  double s = 0.0;
  for (int k = 0; k < g.dim(); ++k) {
    if ((bits >> k) & 1u) {
      const double d = (u[c + static_cast<std::size_t>(g.stride(k))] - u[c]) / g.spacing();
      s += d * d;
    }
  }
  return std::sqrt(s);
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  const auto& cells = a.grid().active_cells();
  return detail::parallel_sum(cells.size(), [&](std::size_t i) { return a[cells[i]] * b[cells[i]]; }) *
         a.grid().cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  const auto& cells = a.grid().active_cells();
  const int dim = a.dim();
  return detail::parallel_sum(cells.size(),
                              [&](std::size_t i) {
                                const double* x = a.at(cells[i]);
                                const double* y = b.at(cells[i]);
                                double s = 0.0;
                                for (int k = 0; k < dim; ++k) s += x[k] * y[k];
                                return s;
                              }) *
         a.grid().cell_volume();
}

double interior_lp_norm(const ScalarField& u, double p) {
  const auto& cells = u.grid().interior_cells();
  const double s = detail::parallel_sum(cells.size(), [&](std::size_t i) {
    return std::pow(std::abs(u[cells[i]]), p);
  });
  return std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

double interior_sup_norm(const ScalarField& u) {
  const auto& cells = u.grid().interior_cells();
  return detail::parallel_max(cells.size(), [&](std::size_t i) { return std::abs(u[cells[i]]); });
}

double max_abs_trace(const ScalarField& u) {
  double m = 0.0;
  for (std::uint32_t c : u.grid().boundary_cells()) m = std::max(m, std::abs(u[c]));
  return m;
}

bool all_finite(const ScalarField& u) {
  for (std::uint32_t c : u.grid().active_cells())
    if (!std::isfinite(u[c])) return false;
  return true;
}

bool all_finite(const VectorField& z) {
  for (double v : z.values())
    if (!std::isfinite(v)) return false;
  return true;
}

double vector_sup_norm(const VectorField& z) {
  const Grid& g = z.grid();
  double m = 0.0;
  for (std::uint32_t c : g.active_cells()) {
    const double* zc = z.at(c);
    double s = 0.0;
    for (int k = 0; k < g.dim(); ++k) s += zc[k] * zc[k];
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

double truncate_tk(double s, double k) { return std::max(-k, std::min(s, k)); }

double truncate_gk(double s, double k) {
  const double excess = std::abs(s) - k;
  if (excess <= 0.0) return 0.0;
  return s > 0.0 ? excess : -excess;
}

double vdelta(double s, double delta) {
  if (s <= delta) return 1.0;
  if (s >= 2.0 * delta) return 0.0;
  return (2.0 * delta - s) / delta;
}

Constants sobolev_constants(int n) {
  if (n < 2) throw ContractViolation("sobolev_constants needs n >= 2");
  Constants k;
  k.n = n;
  k.omega_n = std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  const double root = std::pow(k.omega_n, 1.0 / n);
  k.s1 = 1.0 / (n * root);
  k.s1_tilde = 1.0 / ((n - 1) * root);
  return k;
}

}  // namespace onelap
