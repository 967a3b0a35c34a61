#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mcflow/common/types.hpp"
#include "mcflow/mesh/mesh.hpp"

namespace mcflow {

/// Face addressing of an LDU matrix: internal-face owner and neighbour
/// arrays. Shared between matrices of the same sparsity pattern.
struct LduAddressing {
  Label n_cells = 0;
  std::vector<Label> owner;
  std::vector<Label> neighbour;
  /// Hash of n_cells, owner and neighbour; identifies the pattern.
  std::uint64_t fingerprint = 0;

  [[nodiscard]] Label n_faces() const noexcept { return static_cast<Label>(owner.size()); }
  /// Nonzeros of the represented matrix: n_cells + 2 * n_faces.
  [[nodiscard]] std::int64_t nnz() const noexcept { return n_cells + 2 * static_cast<std::int64_t>(owner.size()); }

  static std::shared_ptr<const LduAddressing> create(Label n_cells, std::vector<Label> owner,
                                                     std::vector<Label> neighbour);
  static std::shared_ptr<const LduAddressing> from_mesh(const UnstructuredMesh& mesh);
};

/// Square sparse matrix in diagonal / lower / upper face form.
/// lower[f] sits at (neighbour[f], owner[f]), upper[f] at (owner[f], neighbour[f]).
class LduMatrix {
 public:
  LduMatrix() = default;
  explicit LduMatrix(std::shared_ptr<const LduAddressing> addressing);

  [[nodiscard]] const LduAddressing& addressing() const noexcept { return *addressing_; }
  [[nodiscard]] const std::shared_ptr<const LduAddressing>& addressing_ptr() const noexcept { return addressing_; }
  [[nodiscard]] Label n_cells() const noexcept { return addressing_ ? addressing_->n_cells : 0; }
  [[nodiscard]] Label n_faces() const noexcept { return addressing_ ? addressing_->n_faces() : 0; }

  std::vector<double>& diag() noexcept { return diag_; }
  std::vector<double>& lower() noexcept { return lower_; }
  std::vector<double>& upper() noexcept { return upper_; }
  [[nodiscard]] std::span<const double> diag() const noexcept { return diag_; }
  [[nodiscard]] std::span<const double> lower() const noexcept { return lower_; }
  [[nodiscard]] std::span<const double> upper() const noexcept { return upper_; }

  void set_zero();
  [[nodiscard]] bool symmetric() const;

  /// Bitwise comparison of values and pattern.
  friend bool operator==(const LduMatrix& a, const LduMatrix& b);

 private:
  std::shared_ptr<const LduAddressing> addressing_;
  std::vector<double> diag_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Row-major n x n dense copy, for small verification problems.
std::vector<double> to_dense(const LduMatrix& matrix);

/// y = A x straight from the face arrays (sequential reference).
std::vector<double> ldu_multiply(const LduMatrix& matrix, std::span<const double> x);

}  // namespace mcflow
