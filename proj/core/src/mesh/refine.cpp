#include "mcflow/mesh/refine.hpp"

#include <limits>
#include <unordered_map>

#include "mcflow/common/error.hpp"

namespace mcflow {

namespace {

// VTK corner index of the hex corner at parametric position (i, j, k).
constexpr int corner(int i, int j, int k) { return 4 * k + (j == 0 ? i : 3 - i); }

// Hex-local side index for the face of the parametric cube at `axis` = lo/hi.
constexpr int side_of(int axis, bool high) { return 2 * axis + (high ? 1 : 0); }

struct EdgeKeyHash {
  std::size_t operator()(std::uint64_t k) const noexcept { return static_cast<std::size_t>(k * 0x9E3779B97F4A7C15ull); }
};

UnstructuredMesh refine_once(const UnstructuredMesh& mesh) {
  const auto hexes = cell_hexes(mesh);
  const auto n_cells = static_cast<std::int64_t>(mesh.n_cells());
  if (n_cells * 8 > std::numeric_limits<Label>::max() / 6) throw MeshError("refined mesh overflows 32-bit addressing");

  std::vector<Vec3> points(mesh.points().begin(), mesh.points().end());
  std::unordered_map<std::uint64_t, Label, EdgeKeyHash> edge_mid;
  edge_mid.reserve(static_cast<std::size_t>(n_cells) * 3);
  std::vector<Label> face_mid(static_cast<std::size_t>(mesh.n_faces()), -1);

  auto edge_point = [&](Label a, Label b) {
    if (a > b) std::swap(a, b);
    const auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
    auto [it, inserted] = edge_mid.try_emplace(key, static_cast<Label>(points.size()));
    if (inserted) points.push_back((points[a] + points[b]) * 0.5);
    return it->second;
  };
  auto face_point = [&](Label face) {
    Label& id = face_mid[static_cast<std::size_t>(face)];
    if (id < 0) {
      const auto& q = mesh.faces()[face];
      Vec3 sum = points[q[0]];
      for (std::size_t i = 1; i < 4; ++i) sum += points[q[i]];
      id = static_cast<Label>(points.size());
      points.push_back(sum * 0.25);
    }
    return id;
  };

  std::vector<HexVertices> children;
  children.reserve(static_cast<std::size_t>(n_cells) * 8);

  for (std::int64_t c = 0; c < n_cells; ++c) {
    const auto& hc = hexes[static_cast<std::size_t>(c)];
    // 3x3x3 lattice of parent corners, edge midpoints, face centres and centre.
    Label node[3][3][3];
    for (int k = 0; k < 3; ++k) {
      for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
          const int mids = (i == 1) + (j == 1) + (k == 1);
          if (mids == 0) {
            node[i][j][k] = hc.vertices[corner(i / 2, j / 2, k / 2)];
          } else if (mids == 1) {
            const int ai = i == 1 ? 0 : i / 2, bi = i == 1 ? 1 : i / 2;
            const int aj = j == 1 ? 0 : j / 2, bj = j == 1 ? 1 : j / 2;
            const int ak = k == 1 ? 0 : k / 2, bk = k == 1 ? 1 : k / 2;
            node[i][j][k] = edge_point(hc.vertices[corner(ai, aj, ak)], hc.vertices[corner(bi, bj, bk)]);
          } else if (mids == 2) {
            const int axis = i != 1 ? 0 : (j != 1 ? 1 : 2);
            const int coord = axis == 0 ? i : (axis == 1 ? j : k);
            node[i][j][k] = face_point(hc.sides[static_cast<std::size_t>(side_of(axis, coord == 2))]);
          }
        }
      }
    }
    Vec3 centre = points[hc.vertices[0]];
    for (std::size_t v = 1; v < 8; ++v) centre += points[hc.vertices[v]];
    node[1][1][1] = static_cast<Label>(points.size());
    points.push_back(centre * 0.125);

    for (int r = 0; r < 2; ++r) {
      for (int q = 0; q < 2; ++q) {
        for (int p = 0; p < 2; ++p) {
          HexVertices child{};
          for (int k = 0; k < 2; ++k) {
            for (int j = 0; j < 2; ++j) {
              for (int i = 0; i < 2; ++i) child[static_cast<std::size_t>(corner(i, j, k))] = node[p + i][q + j][r + k];
            }
          }
          children.push_back(child);
        }
      }
    }
  }

  std::vector<std::string> names;
  for (const auto& p : mesh.patches()) names.push_back(p.name);

  // Child p + 2q + 4r touches parent side s iff its parametric coordinate
  // along that axis sits on the same end.
  auto classify = [&](Label child, int side) -> Label {
    const Label parent = child / 8;
    const int local = child % 8;
    const int coord[3] = {local & 1, (local >> 1) & 1, (local >> 2) & 1};
    const int axis = side / 2;
    const bool high = side % 2 == 1;
    if (coord[axis] != (high ? 1 : 0)) return -1;
    const Label face = hexes[static_cast<std::size_t>(parent)].sides[static_cast<std::size_t>(side)];
    if (face < mesh.n_internal_faces()) return -1;
    return mesh.patch_of_face(face);
  };
  return mesh_from_hexes(std::move(points), children, std::move(names), classify);
}

}  // namespace

std::uint64_t refined_cell_count(std::uint64_t n_cells, int levels) {
  if (levels < 0) throw MeshError("refinement levels must be non-negative");
  std::uint64_t n = n_cells;
  for (int l = 0; l < levels; ++l) {
    if (n > std::numeric_limits<std::uint64_t>::max() / 8) {
      throw MeshError("refined cell count overflows after " + std::to_string(l) + " levels");
    }
    n *= 8;
  }
  return n;
}

UnstructuredMesh refine_uniform(const UnstructuredMesh& mesh, int levels) {
  const auto target = refined_cell_count(static_cast<std::uint64_t>(mesh.n_cells()), levels);
  if (target > static_cast<std::uint64_t>(std::numeric_limits<Label>::max() / 6)) {
    throw MeshError("refined mesh with " + std::to_string(target) + " cells overflows 32-bit addressing");
  }
  UnstructuredMesh out = mesh;
  for (int l = 0; l < levels; ++l) out = refine_once(out);
  return out;
}

}  // namespace mcflow
