#pragma once

#include <filesystem>
#include <iosfwd>

#include "bevx/sparse.hpp"
#include "bevx/tensor.hpp"

namespace bevx::io {

// Tensor file "BXT1":
//   magic "BXT1" | rank u64 | extents u64[rank] | payload f32[product]
// Sparse file "BXS1":
//   magic "BXS1" | rows u64 | cols u64 | nnz u64 |
//   row_offsets u64[rows + 1] | col_indices u64[nnz]
// All integers and floats are little-endian.

void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

void write_sparse(std::ostream& out, const SparseBinaryMatrix& m);
SparseBinaryMatrix read_sparse(std::istream& in);
void save_sparse(const std::filesystem::path& path, const SparseBinaryMatrix& m);
SparseBinaryMatrix load_sparse(const std::filesystem::path& path);

}  // namespace bevx::io
