#include "mcflow/sparse/triplet_io.hpp"

#include "mcflow/common/binary_io.hpp"
#include "mcflow/common/error.hpp"

namespace mcflow {
namespace {
constexpr const char* kMagic = "MCTRIPL1";
}

Triplets to_triplets(const BlockCsrMatrix& m) {
  Triplets t;
  t.n = static_cast<std::uint64_t>(m.n_rows());
  t.rows.reserve(m.nnz());
  t.cols.reserve(m.nnz());
  t.values.reserve(m.nnz());
  for (Label i = 0; i < m.threads(); ++i) {
    const CellRange rows = m.row_ranges()[i];
    const auto members = m.blocks_in_row(i);
    for (Label r = rows.begin; r < rows.end; ++r) {
      const auto lr = static_cast<std::size_t>(r - rows.begin);
      for (Label id : members) {
        const auto& b = m.blocks()[static_cast<std::size_t>(id)];
        for (Label k = b.row_offsets[lr]; k < b.row_offsets[lr + 1]; ++k) {
          const std::size_t p = b.value_offset + static_cast<std::size_t>(k);
          t.rows.push_back(static_cast<std::uint64_t>(r));
          t.cols.push_back(static_cast<std::uint64_t>(m.columns()[p]));
          t.values.push_back(m.values()[p]);
        }
      }
    }
  }
  return t;
}

void write_triplets(const std::string& path, const Triplets& t) {
  if (t.rows.size() != t.cols.size() || t.rows.size() != t.values.size()) {
    throw DimensionError("triplet arrays differ in length");
  }
  detail::ByteWriter w;
  w.put_chars(kMagic);
  w.put_u64(t.n);
  w.put_u64(t.values.size());
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    w.put_u64(t.rows[k]);
    w.put_u64(t.cols[k]);
    w.put_f64(t.values[k]);
  }
  detail::write_file(path, w.bytes());
}

Triplets read_triplets(const std::string& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path);
  if (r.get_chars(8) != kMagic) throw FormatError(path + ": not a triplet file");
  Triplets t;
  t.n = r.get_u64();
  const std::uint64_t nnz = r.get_u64();
  if (nnz > r.remaining() / 24 || r.remaining() != nnz * 24) throw FormatError(path + ": truncated or oversized triplet payload");
  t.rows.resize(nnz);
  t.cols.resize(nnz);
  t.values.resize(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    t.rows[k] = r.get_u64();
    t.cols[k] = r.get_u64();
    t.values[k] = r.get_f64();
    if (t.rows[k] >= t.n || t.cols[k] >= t.n) throw FormatError(path + ": triplet index out of range");
  }
  return t;
}

}  // namespace mcflow
