// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Dense reference operators assembled from cell indices alone (no link
// bitmasks, no library stencils), used as independent oracles.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "onelap/grid.hpp"

namespace oracle {

struct DenseGradient {
  Eigen::MatrixXd D;                  ///< rows: (active cell, axis); cols: interior cells
  std::vector<std::uint32_t> rows;    ///< cell of each row block
  std::vector<std::uint32_t> cols;    ///< interior cell of each column
};

inline DenseGradient dense_gradient(const onelap::Grid& g) {
  DenseGradient out;
  out.cols = g.interior_cells();
  out.rows = g.active_cells();
  std::vector<long> col_of(g.size(), -1);
  for (std::size_t j = 0; j < out.cols.size(); ++j) col_of[out.cols[j]] = static_cast<long>(j);
  const int dim = g.dim();
  out.D = Eigen::MatrixXd::Zero(static_cast<long>(out.rows.size()) * dim, static_cast<long>(out.cols.size()));
  std::vector<int> idx(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const std::size_t c = out.rows[i];
    for (int k = 0; k < dim; ++k) {
      g.index_of(c, idx);
      if (idx[k] + 1 >= g.shape()[k]) continue;
      ++idx[k];
      const std::size_t nb = g.linear(idx);
      if (!g.in_mask(nb)) continue;
      const long row = static_cast<long>(i) * dim + k;
      if (col_of[nb] >= 0) out.D(row, col_of[nb]) += 1.0 / g.spacing();
      if (col_of[c] >= 0) out.D(row, col_of[c]) -= 1.0 / g.spacing();
    }
  }
  return out;
}

inline Eigen::VectorXd interior_vector(const onelap::ScalarField& u) {
  const auto& in = u.grid().interior_cells();
  Eigen::VectorXd v(static_cast<long>(in.size()));
  for (std::size_t j = 0; j < in.size(); ++j) v[static_cast<long>(j)] = u[in[j]];
  return v;
}

}  // namespace oracle
