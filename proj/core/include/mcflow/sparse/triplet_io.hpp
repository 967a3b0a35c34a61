#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcflow/sparse/block_csr.hpp"

namespace mcflow {

/// Coordinate-form matrix. File layout (little-endian): "MCTRIPL1", u64 n,
/// u64 nnz, then nnz records of (u64 row, u64 col, f64 value).
struct Triplets {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> rows;
  std::vector<std::uint64_t> cols;
  std::vector<double> values;
};

/// Nonzeros in row-major, ascending column order.
Triplets to_triplets(const BlockCsrMatrix& matrix);
void write_triplets(const std::string& path, const Triplets& triplets);
Triplets read_triplets(const std::string& path);

}  // namespace mcflow
