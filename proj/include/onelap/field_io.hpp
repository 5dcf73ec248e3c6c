// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

// Binary field and mask files:
//   onelap-field v1 <dim> <shape...> <spacing>\n  + little-endian float64, row-major
//   onelap-mask v1 <dim> <shape...> <spacing>\n   + uint8 flags (0 exterior, 1 interior, 2 boundary)
// The origin is not stored; masks read back are centered on 0 unless an
// origin is supplied.

#pragma once

#include <string>
#include <vector>

#include "onelap/grid.hpp"

namespace onelap {

void write_field(const std::string& path, const ScalarField& u);
ScalarField read_field(const std::string& path, const GridPtr& grid);

void write_mask(const std::string& path, const Grid& grid);
/// Write an arbitrary cell subset (e.g. a Cheeger candidate) in mask format;
/// selected cells are flagged interior, everything else exterior.
void write_mask(const std::string& path, const Grid& grid, const std::vector<bool>& selected);
GridPtr read_mask(const std::string& path, std::vector<double> origin = {});

/// In-memory file images, byte-identical to what the writers produce.
std::string encode_field(const ScalarField& u);
std::string encode_mask(const Grid& grid);
std::string encode_mask(const Grid& grid, const std::vector<bool>& selected);

std::string field_header(const Grid& grid);
std::string mask_header(const Grid& grid);

}  // namespace onelap
