#include "mcflow/common/error.hpp"

namespace mcflow {

DegenerateCellError::DegenerateCellError(std::int64_t cell, double volume)
    : MeshError("degenerate cell " + std::to_string(cell) + " (volume " + std::to_string(volume) + ")"),
      cell_(cell) {}

ZeroDiagonalError::ZeroDiagonalError(std::int64_t row)
    : Error("zero diagonal coefficient in row " + std::to_string(row)), row_(row) {}

}  // namespace mcflow
