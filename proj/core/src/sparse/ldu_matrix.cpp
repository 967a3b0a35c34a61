#include "mcflow/sparse/ldu_matrix.hpp"

#include <cstring>
#include <string>

#include "mcflow/common/error.hpp"

namespace mcflow {
namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::shared_ptr<const LduAddressing> LduAddressing::create(Label n_cells, std::vector<Label> owner,
                                                           std::vector<Label> neighbour) {
  if (n_cells < 0) throw DimensionError("negative cell count");
  if (owner.size() != neighbour.size()) throw DimensionError("owner and neighbour lengths differ");
  for (std::size_t f = 0; f < owner.size(); ++f) {
    if (owner[f] < 0 || neighbour[f] >= n_cells || owner[f] >= neighbour[f]) {
      throw DimensionError("face " + std::to_string(f) + " has invalid owner/neighbour");
    }
  }
  auto a = std::make_shared<LduAddressing>();
  a->n_cells = n_cells;
  a->owner = std::move(owner);
  a->neighbour = std::move(neighbour);
  std::uint64_t h = 14695981039346656037ull;
  h = fnv1a(h, &n_cells, sizeof n_cells);
  h = fnv1a(h, a->owner.data(), a->owner.size() * sizeof(Label));
  h = fnv1a(h, a->neighbour.data(), a->neighbour.size() * sizeof(Label));
  a->fingerprint = h;
  return a;
}

std::shared_ptr<const LduAddressing> LduAddressing::from_mesh(const UnstructuredMesh& mesh) {
  const auto nf = static_cast<std::size_t>(mesh.n_internal_faces());
  return create(mesh.n_cells(), {mesh.owner().begin(), mesh.owner().begin() + static_cast<std::ptrdiff_t>(nf)},
                {mesh.neighbour().begin(), mesh.neighbour().end()});
}

LduMatrix::LduMatrix(std::shared_ptr<const LduAddressing> addressing)
    : addressing_(std::move(addressing)),
      diag_(static_cast<std::size_t>(addressing_->n_cells), 0.0),
      lower_(addressing_->owner.size(), 0.0),
      upper_(addressing_->owner.size(), 0.0) {}

void LduMatrix::set_zero() {
  std::fill(diag_.begin(), diag_.end(), 0.0);
  std::fill(lower_.begin(), lower_.end(), 0.0);
  std::fill(upper_.begin(), upper_.end(), 0.0);
}

bool LduMatrix::symmetric() const { return lower_ == upper_; }

bool operator==(const LduMatrix& a, const LduMatrix& b) {
  auto same_bits = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() && (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  };
  const bool same_pattern = a.addressing_ == b.addressing_ ||
                            (a.addressing_ && b.addressing_ && a.addressing_->fingerprint == b.addressing_->fingerprint);
  return same_pattern && same_bits(a.diag_, b.diag_) && same_bits(a.lower_, b.lower_) && same_bits(a.upper_, b.upper_);
}

std::vector<double> to_dense(const LduMatrix& matrix) {
  const auto n = static_cast<std::size_t>(matrix.n_cells());
  std::vector<double> d(n * n, 0.0);
  const auto& addr = matrix.addressing();
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = matrix.diag()[i];
  for (std::size_t f = 0; f < addr.owner.size(); ++f) {
    const auto o = static_cast<std::size_t>(addr.owner[f]);
    const auto nb = static_cast<std::size_t>(addr.neighbour[f]);
    d[o * n + nb] = matrix.upper()[f];
    d[nb * n + o] = matrix.lower()[f];
  }
  return d;
}

std::vector<double> ldu_multiply(const LduMatrix& matrix, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(matrix.n_cells())) throw DimensionError("vector length mismatch");
  const auto& addr = matrix.addressing();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = matrix.diag()[i] * x[i];
  for (std::size_t f = 0; f < addr.owner.size(); ++f) {
    const auto o = static_cast<std::size_t>(addr.owner[f]);
    const auto nb = static_cast<std::size_t>(addr.neighbour[f]);
    y[o] += matrix.upper()[f] * x[nb];
    y[nb] += matrix.lower()[f] * x[o];
  }
  return y;
}

}  // namespace mcflow
