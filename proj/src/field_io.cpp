// Copyright The onelap Authors.
// SPDX-License-Identifier: Apache-2.0

#include "onelap/field_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "onelap/error.hpp"

namespace onelap {

namespace {

std::string header(const char* tag, const Grid& g) {
  std::ostringstream os;
  os << tag << " v1 " << g.dim();
  for (int s : g.shape()) os << ' ' << s;
  char buf[64];
  std::snprintf(buf, sizeof buf, " %.17g", g.spacing());
  os << buf << '\n';
  return os.str();
}

struct Header {
  int dim = 0;
  std::vector<int> shape;
  double spacing = 0.0;
};

Header parse_header(std::istream& in, const std::string& tag, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": missing header");
  std::istringstream hs(line);
  std::string t, version;
  Header h;
  hs >> t >> version >> h.dim;
  if (t != tag || version != "v1") throw IoError(path + ": expected '" + tag + " v1' header");
  if (!hs || h.dim < 2 || h.dim > Grid::kMaxDim) throw IoError(path + ": bad dimension in header");
  h.shape.resize(static_cast<std::size_t>(h.dim));
  for (auto& s : h.shape) hs >> s;
  hs >> h.spacing;
  if (!hs) throw IoError(path + ": truncated header");
  return h;
}

std::size_t product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

}  // namespace

std::string field_header(const Grid& grid) { return header("onelap-field", grid); }
std::string mask_header(const Grid& grid) { return header("onelap-mask", grid); }

std::string encode_field(const ScalarField& u) {
  std::string out = field_header(u.grid());
  out.reserve(out.size() + 8 * u.size());
  for (double v : u.values()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.append(bytes, 8);
  }
  return out;
}

std::string encode_mask(const Grid& grid) {
  std::string out = mask_header(grid);
  for (CellKind k : grid.kinds()) out.push_back(static_cast<char>(k));
  return out;
}

std::string encode_mask(const Grid& grid, const std::vector<bool>& selected) {
  require(selected.size() == grid.size(), "selection size does not match grid");
  std::string out = mask_header(grid);
  for (std::size_t c = 0; c < grid.size(); ++c)
    out.push_back(static_cast<char>(selected[c] ? CellKind::Interior : CellKind::Exterior));
  return out;
}

namespace {

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_field(const std::string& path, const ScalarField& u) { write_bytes(path, encode_field(u)); }

ScalarField read_field(const std::string& path, const GridPtr& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const Header h = parse_header(in, "onelap-field", path);
  if (h.dim != grid->dim() || h.shape != grid->shape() || h.spacing != grid->spacing())
    throw ContractViolation(path + ": field layout does not match the grid");
  ScalarField u(grid);
  auto vals = u.values();
  for (std::size_t i = 0; i < product(h.shape); ++i) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw IoError(path + ": truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    vals[i] = std::bit_cast<double>(bits);
  }
  return u;
}

void write_mask(const std::string& path, const Grid& grid) { write_bytes(path, encode_mask(grid)); }

void write_mask(const std::string& path, const Grid& grid, const std::vector<bool>& selected) {
  write_bytes(path, encode_mask(grid, selected));
}

GridPtr read_mask(const std::string& path, std::vector<double> origin) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const Header h = parse_header(in, "onelap-mask", path);
  std::vector<CellKind> kinds(product(h.shape));
  for (auto& k : kinds) {
    const int b = in.get();
    if (b == EOF) throw IoError(path + ": truncated payload");
    if (b > 2) throw IoError(path + ": invalid mask flag " + std::to_string(b));
    k = static_cast<CellKind>(b);
  }
  return Grid::from_mask(h.shape, h.spacing, std::move(origin), std::move(kinds));
}

}  // namespace onelap
