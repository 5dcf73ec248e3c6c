// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Uniform Cartesian grids with a one-cell Dirichlet collar, nodal scalar
// fields, per-cell vector fields and the forward-difference
// gradient/divergence pair.
//
// Vector field convention: component k stored at cell c is the value on the
// face between c and c + e_k. A component is only meaningful when both cells
// belong to the mask (interior or boundary); the gradient sets it to zero
// otherwise, so divergence = -gradient^T holds exactly for every field.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace onelap {

enum class CellKind : std::uint8_t { Exterior = 0, Interior = 1, Boundary = 2 };

enum class DomainKind { Ball, Box, Custom };

struct BallShape {
  std::vector<double> center;
  double radius = 0.0;
};

class Grid {
 public:
  static constexpr int kMaxDim = 8;

  /// Rasterized ball: `cells_across` cells span the diameter; a cell is
  /// interior iff its center lies in the closed ball. One collar layer plus
  /// the array edge surround it.
  static std::shared_ptr<const Grid> ball(int dim, double radius, int cells_across,
                                          std::vector<double> center = {});

  /// Box [lower, lower + cells*h]^dim tiled exactly by interior cells.
  static std::shared_ptr<const Grid> box(int dim, double lower, double upper,
                                         int cells_per_axis);

  /// Arbitrary domain. Cells flagged Interior are the unknowns; the collar is
  /// recomputed (any extra Boundary flags are kept).
  static std::shared_ptr<const Grid> from_mask(std::vector<int> shape, double spacing,
                                               std::vector<double> origin,
                                               std::vector<CellKind> kinds);

  int dim() const { return dim_; }
  const std::vector<int>& shape() const { return shape_; }
  double spacing() const { return h_; }
  const std::vector<double>& origin() const { return origin_; }
  DomainKind domain_kind() const { return domain_kind_; }
  const std::optional<BallShape>& ball_shape() const { return ball_; }

  std::size_t size() const { return kinds_.size(); }
  CellKind kind(std::size_t c) const { return kinds_[c]; }
  const std::vector<CellKind>& kinds() const { return kinds_; }
  bool in_mask(std::size_t c) const { return kinds_[c] != CellKind::Exterior; }
  bool is_interior(std::size_t c) const { return kinds_[c] == CellKind::Interior; }

  std::ptrdiff_t stride(int axis) const { return strides_[axis]; }
  /// Bit k set iff the forward face along axis k joins two mask cells.
  std::uint8_t links(std::size_t c) const { return links_[c]; }
  bool has_link(std::size_t c, int axis) const { return (links_[c] >> axis) & 1u; }

  const std::vector<std::uint32_t>& active_cells() const { return active_; }
  const std::vector<std::uint32_t>& interior_cells() const { return interior_; }
  const std::vector<std::uint32_t>& boundary_cells() const { return boundary_; }

  double cell_volume() const { return cell_volume_; }
  double face_area() const { return face_area_; }
  /// Sum of interior cell volumes.
  double interior_volume() const { return cell_volume_ * static_cast<double>(interior_.size()); }

  void index_of(std::size_t c, std::span<int> idx) const;
  std::size_t linear(std::span<const int> idx) const;
  void center(std::size_t c, std::span<double> x) const;
  double center_coord(std::size_t c, int axis) const;

  bool same_layout(const Grid& other) const;

 private:
  Grid() = default;
  void finalize();

  int dim_ = 0;
  std::vector<int> shape_;
  double h_ = 0.0;
  std::vector<double> origin_;
  DomainKind domain_kind_ = DomainKind::Custom;
  std::optional<BallShape> ball_;
  std::vector<CellKind> kinds_;
  std::vector<std::ptrdiff_t> strides_;
  std::vector<std::uint8_t> links_;
  std::vector<std::uint32_t> active_, interior_, boundary_;
  double cell_volume_ = 0.0, face_area_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double value = 0.0);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  double& operator[](std::size_t c) { return v_[c]; }
  double operator[](std::size_t c) const { return v_[c]; }
  std::size_t size() const { return v_.size(); }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid, double value = 0.0);

  const GridPtr& grid_ptr() const { return grid_; }
  const Grid& grid() const { return *grid_; }
  int dim() const { return grid_->dim(); }
  double* at(std::size_t c) { return v_.data() + c * static_cast<std::size_t>(dim()); }
  const double* at(std::size_t c) const {
    return v_.data() + c * static_cast<std::size_t>(dim());
  }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

/// Contract check: throws ContractViolation unless both live on one layout.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

VectorField gradient(const ScalarField& u);
ScalarField divergence(const VectorField& z);

/// Euclidean norm of the forward-difference gradient at c.
double gradient_norm_at(const ScalarField& u, std::size_t c);

/// Inner products over all mask cells, weighted by the cell volume.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

double interior_lp_norm(const ScalarField& u, double p);
double interior_sup_norm(const ScalarField& u);
double max_abs_trace(const ScalarField& u);
bool all_finite(const ScalarField& u);
bool all_finite(const VectorField& z);
double vector_sup_norm(const VectorField& z);

/// Evaluate fn(x) at every mask cell center; exterior cells stay 0.
template <class Fn>
ScalarField sample(const GridPtr& grid, Fn&& fn) {
  ScalarField out(grid);
  std::vector<double> x(static_cast<std::size_t>(grid->dim()));
  for (std::uint32_t c : grid->active_cells()) {
    grid->center(c, x);
    out[c] = fn(std::span<const double>(x));
  }
  return out;
}

// Truncations and cut-off used throughout the level-set estimates.
double truncate_tk(double s, double k);
double truncate_gk(double s, double k);
double vdelta(double s, double delta);

struct Constants {
  int n = 0;
  double omega_n = 0.0;   ///< volume of the unit ball in R^n
  double s1 = 0.0;        ///< 1 / (n omega_n^{1/n})
  double s1_tilde = 0.0;  ///< 1 / ((n-1) omega_n^{1/n})
};

Constants sobolev_constants(int n);

}  // namespace onelap
