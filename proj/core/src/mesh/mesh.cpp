#include "mcflow/mesh/mesh.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "mcflow/common/error.hpp"

namespace mcflow {

namespace {

constexpr std::array<std::array<int, 4>, 6> kHexSides{{
    {0, 4, 7, 3},  // x-
    {1, 2, 6, 5},  // x+
    {0, 1, 5, 4},  // y-
    {3, 7, 6, 2},  // y+
    {0, 3, 2, 1},  // z-
    {4, 5, 6, 7},  // z+
}};

using QuadKey = std::array<Label, 4>;

QuadKey sorted_key(const QuadFace& f) {
  QuadKey k = f;
  std::sort(k.begin(), k.end());
  return k;
}

struct QuadKeyHash {
  std::size_t operator()(const QuadKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (Label v : k) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

QuadFace flipped(const QuadFace& f) { return {f[0], f[3], f[2], f[1]}; }

bool same_cycle(const QuadFace& a, const QuadFace& b) {
  for (int r = 0; r < 4; ++r) {
    bool eq = true;
    for (int i = 0; i < 4 && eq; ++i) eq = a[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>((i + r) % 4)];
    if (eq) return true;
  }
  return false;
}

}  // namespace

QuadFace hex_side(const HexVertices& hex, int local_face) {
  const auto& s = kHexSides[static_cast<std::size_t>(local_face)];
  return {hex[s[0]], hex[s[1]], hex[s[2]], hex[s[3]]};
}

UnstructuredMesh::UnstructuredMesh(Label n_cells, std::vector<Vec3> points, std::vector<QuadFace> faces,
                                   std::vector<Label> owner, std::vector<Label> neighbour,
                                   std::vector<BoundaryPatch> patches)
    : n_cells_(n_cells),
      points_(std::move(points)),
      faces_(std::move(faces)),
      owner_(std::move(owner)),
      neighbour_(std::move(neighbour)),
      patches_(std::move(patches)) {
  validate();
}

void UnstructuredMesh::validate() const {
  if (n_cells_ < 1) throw MeshError("mesh must have at least one cell");
  if (owner_.size() != faces_.size()) throw MeshError("owner list length differs from face count");
  if (neighbour_.size() > faces_.size()) throw MeshError("more neighbours than faces");

  const auto np = static_cast<Label>(points_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    for (Label p : faces_[f]) {
      if (p < 0 || p >= np) throw MeshError("face " + std::to_string(f) + " references point out of range");
    }
    if (owner_[f] < 0 || owner_[f] >= n_cells_) throw MeshError("face " + std::to_string(f) + " owner out of range");
  }
  for (std::size_t f = 0; f < neighbour_.size(); ++f) {
    if (neighbour_[f] < 0 || neighbour_[f] >= n_cells_) {
      throw MeshError("face " + std::to_string(f) + " neighbour out of range");
    }
    if (owner_[f] >= neighbour_[f]) {
      throw MeshError("internal face " + std::to_string(f) + " violates owner < neighbour");
    }
  }

  Label next = n_internal_faces();
  for (const auto& p : patches_) {
    if (p.start != next || p.size < 0) throw MeshError("patch '" + p.name + "' is not contiguous with its predecessor");
    next += p.size;
  }
  if (next != n_faces()) throw MeshError("boundary patches do not cover all boundary faces");

  std::vector<Label> degree(static_cast<std::size_t>(n_cells_), 0);
  for (Label c : owner_) ++degree[c];
  for (Label c : neighbour_) ++degree[c];
  for (Label c = 0; c < n_cells_; ++c) {
    if (degree[c] == 0) throw MeshError("cell " + std::to_string(c) + " has no faces");
  }

  // Connectivity through internal faces.
  std::vector<Label> offsets(static_cast<std::size_t>(n_cells_) + 1, 0);
  for (std::size_t f = 0; f < neighbour_.size(); ++f) {
    ++offsets[owner_[f] + 1];
    ++offsets[neighbour_[f] + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<Label> adj(static_cast<std::size_t>(offsets.back()));
  auto fill = offsets;
  for (std::size_t f = 0; f < neighbour_.size(); ++f) {
    adj[fill[owner_[f]]++] = neighbour_[f];
    adj[fill[neighbour_[f]]++] = owner_[f];
  }
  std::vector<char> seen(static_cast<std::size_t>(n_cells_), 0);
  std::queue<Label> q;
  q.push(0);
  seen[0] = 1;
  Label reached = 1;
  while (!q.empty()) {
    const Label c = q.front();
    q.pop();
    for (Label k = offsets[c]; k < offsets[c + 1]; ++k) {
      if (!seen[adj[k]]) {
        seen[adj[k]] = 1;
        ++reached;
        q.push(adj[k]);
      }
    }
  }
  if (reached != n_cells_) throw MeshError("cell adjacency graph is not connected");
}

Label UnstructuredMesh::patch_of_face(Label face) const {
  for (std::size_t p = 0; p < patches_.size(); ++p) {
    if (face >= patches_[p].start && face < patches_[p].start + patches_[p].size) return static_cast<Label>(p);
  }
  throw MeshError("face " + std::to_string(face) + " is not a boundary face");
}

Label UnstructuredMesh::find_patch(const std::string& name) const {
  for (std::size_t p = 0; p < patches_.size(); ++p) {
    if (patches_[p].name == name) return static_cast<Label>(p);
  }
  return -1;
}

UnstructuredMesh mesh_from_hexes(std::vector<Vec3> points, std::span<const HexVertices> hexes,
                                 std::vector<std::string> patch_names, const BoundaryClassifier& classify) {
  if (hexes.size() > static_cast<std::size_t>(std::numeric_limits<Label>::max() / 6)) {
    throw MeshError("too many cells for 32-bit face addressing");
  }
  struct Pending {
    Label cell;
    int side;
    QuadFace quad;
  };
  std::unordered_map<QuadKey, Pending, QuadKeyHash> open;
  open.reserve(hexes.size() * 4);

  struct Internal {
    Label owner, neighbour;
    QuadFace quad;
  };
  std::vector<Internal> internal;
  internal.reserve(hexes.size() * 3);

  for (std::size_t c = 0; c < hexes.size(); ++c) {
    for (int s = 0; s < 6; ++s) {
      QuadFace q = hex_side(hexes[c], s);
      auto key = sorted_key(q);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, Pending{static_cast<Label>(c), s, q});
      } else {
        if (it->second.cell == static_cast<Label>(c)) throw MeshError("cell " + std::to_string(c) + " repeats a face");
        if (!same_cycle(flipped(q), it->second.quad)) {
          throw MeshError("inconsistent orientation on face shared by cells " + std::to_string(it->second.cell) +
                          " and " + std::to_string(c));
        }
        internal.push_back({it->second.cell, static_cast<Label>(c), it->second.quad});
        open.erase(it);
      }
    }
  }

  std::sort(internal.begin(), internal.end(), [](const Internal& a, const Internal& b) {
    return a.owner != b.owner ? a.owner < b.owner : a.neighbour < b.neighbour;
  });

  struct Boundary {
    Label patch, owner;
    int side;
    QuadFace quad;
  };
  std::vector<Boundary> boundary;
  boundary.reserve(open.size());
  for (const auto& [key, p] : open) {
    const Label patch = classify(p.cell, p.side);
    if (patch < 0 || patch >= static_cast<Label>(patch_names.size())) {
      throw MeshError("unmatched face on side " + std::to_string(p.side) + " of cell " + std::to_string(p.cell));
    }
    boundary.push_back({patch, p.cell, p.side, p.quad});
  }
  std::sort(boundary.begin(), boundary.end(), [](const Boundary& a, const Boundary& b) {
    if (a.patch != b.patch) return a.patch < b.patch;
    if (a.owner != b.owner) return a.owner < b.owner;
    return a.side < b.side;
  });

  std::vector<QuadFace> faces;
  std::vector<Label> owner, neighbour;
  faces.reserve(internal.size() + boundary.size());
  owner.reserve(internal.size() + boundary.size());
  neighbour.reserve(internal.size());
  for (const auto& f : internal) {
    faces.push_back(f.quad);
    owner.push_back(f.owner);
    neighbour.push_back(f.neighbour);
  }
  std::vector<BoundaryPatch> patches;
  patches.reserve(patch_names.size());
  Label start = static_cast<Label>(internal.size());
  std::size_t b = 0;
  for (std::size_t p = 0; p < patch_names.size(); ++p) {
    const Label begin = start;
    while (b < boundary.size() && boundary[b].patch == static_cast<Label>(p)) {
      faces.push_back(boundary[b].quad);
      owner.push_back(boundary[b].owner);
      ++b;
      ++start;
    }
    patches.push_back({std::move(patch_names[p]), begin, start - begin});
  }
  return UnstructuredMesh(static_cast<Label>(hexes.size()), std::move(points), std::move(faces), std::move(owner),
                          std::move(neighbour), std::move(patches));
}

UnstructuredMesh build_box_mesh(Label nx, Label ny, Label nz, const Vec3& lengths) {
  if (nx < 1 || ny < 1 || nz < 1) throw MeshError("box dimensions must be at least 1");
  if (!(lengths.x > 0.0 && lengths.y > 0.0 && lengths.z > 0.0)) throw MeshError("box lengths must be positive");
  const auto cells = static_cast<std::int64_t>(nx) * ny * nz;
  const auto pts = static_cast<std::int64_t>(nx + 1) * (ny + 1) * (nz + 1);
  if (cells > std::numeric_limits<Label>::max() / 6 || pts > std::numeric_limits<Label>::max()) {
    throw MeshError("box dimensions overflow 32-bit addressing");
  }

  std::vector<Vec3> points;
  points.reserve(static_cast<std::size_t>(pts));
  for (Label k = 0; k <= nz; ++k) {
    for (Label j = 0; j <= ny; ++j) {
      for (Label i = 0; i <= nx; ++i) {
        points.push_back({lengths.x * i / nx, lengths.y * j / ny, lengths.z * k / nz});
      }
    }
  }
  auto pid = [&](Label i, Label j, Label k) { return i + (nx + 1) * (j + (ny + 1) * k); };

  std::vector<HexVertices> hexes;
  hexes.reserve(static_cast<std::size_t>(cells));
  for (Label k = 0; k < nz; ++k) {
    for (Label j = 0; j < ny; ++j) {
      for (Label i = 0; i < nx; ++i) {
        hexes.push_back({pid(i, j, k), pid(i + 1, j, k), pid(i + 1, j + 1, k), pid(i, j + 1, k), pid(i, j, k + 1),
                         pid(i + 1, j, k + 1), pid(i + 1, j + 1, k + 1), pid(i, j + 1, k + 1)});
      }
    }
  }
  // Any unmatched side of a box cell lies on the box side with the same index.
  return mesh_from_hexes(std::move(points), hexes, {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"},
                         [](Label, int side) { return static_cast<Label>(side); });
}

CellFaces cell_faces(const UnstructuredMesh& mesh) {
  CellFaces cf;
  cf.offsets.assign(static_cast<std::size_t>(mesh.n_cells()) + 1, 0);
  const auto owner = mesh.owner();
  const auto neighbour = mesh.neighbour();
  for (Label c : owner) ++cf.offsets[c + 1];
  for (Label c : neighbour) ++cf.offsets[c + 1];
  std::partial_sum(cf.offsets.begin(), cf.offsets.end(), cf.offsets.begin());
  cf.faces.resize(static_cast<std::size_t>(cf.offsets.back()));
  auto fill = cf.offsets;
  // Ascending face order per cell: visit faces in order, each once per side.
  for (Label f = 0; f < mesh.n_faces(); ++f) {
    cf.faces[fill[owner[f]]++] = f;
    if (f < mesh.n_internal_faces()) cf.faces[fill[neighbour[f]]++] = f;
  }
  return cf;
}

std::vector<HexCell> cell_hexes(const UnstructuredMesh& mesh) {
  const auto cf = cell_faces(mesh);
  const auto faces = mesh.faces();
  const auto owner = mesh.owner();
  std::vector<HexCell> out(static_cast<std::size_t>(mesh.n_cells()));

  for (Label c = 0; c < mesh.n_cells(); ++c) {
    auto not_hex = [c](const std::string& why) {
      return MeshError("cell " + std::to_string(c) + " is not a hexahedron: " + why);
    };
    const auto my_faces = cf.of(c);
    if (my_faces.size() != 6) throw not_hex(std::to_string(my_faces.size()) + " faces");

    std::array<QuadFace, 6> outward{};
    for (std::size_t i = 0; i < 6; ++i) {
      const Label f = my_faces[i];
      outward[i] = owner[f] == c ? faces[f] : flipped(faces[f]);
    }

    // Bottom quad from the first face, seen from inside the cell.
    const QuadFace& q = outward[0];
    const std::array<Label, 4> bottom{q[0], q[3], q[2], q[1]};

    auto in_bottom = [&](Label v) { return std::find(bottom.begin(), bottom.end(), v) != bottom.end(); };
    HexVertices hex{};
    for (int i = 0; i < 4; ++i) {
      const Label v = bottom[static_cast<std::size_t>(i)];
      hex[static_cast<std::size_t>(i)] = v;
      Label up = -1;
      for (const auto& face : outward) {
        for (int k = 0; k < 4; ++k) {
          const Label a = face[static_cast<std::size_t>(k)];
          const Label b = face[static_cast<std::size_t>((k + 1) % 4)];
          Label other = -1;
          if (a == v) other = b;
          if (b == v) other = a;
          if (other >= 0 && !in_bottom(other)) {
            if (up >= 0 && up != other) throw not_hex("vertex with more than three edges");
            up = other;
          }
        }
      }
      if (up < 0) throw not_hex("missing vertical edge");
      hex[static_cast<std::size_t>(i + 4)] = up;
    }

    HexCell& hc = out[static_cast<std::size_t>(c)];
    hc.vertices = hex;
    std::array<bool, 6> used{};
    for (int s = 0; s < 6; ++s) {
      const QuadFace side = hex_side(hex, s);
      bool found = false;
      for (std::size_t i = 0; i < 6 && !found; ++i) {
        if (!used[i] && same_cycle(side, outward[i])) {
          used[i] = true;
          hc.sides[static_cast<std::size_t>(s)] = my_faces[i];
          found = true;
        }
      }
      if (!found) throw not_hex("faces do not close into a hexahedron");
    }
  }
  return out;
}

bool canonically_equal(const UnstructuredMesh& a, const UnstructuredMesh& b) {
  if (a.n_cells() != b.n_cells() || a.n_faces() != b.n_faces() || a.n_internal_faces() != b.n_internal_faces()) {
    return false;
  }
  if (!std::equal(a.patches().begin(), a.patches().end(), b.patches().begin(), b.patches().end())) return false;
  if (!std::equal(a.owner().begin(), a.owner().end(), b.owner().begin())) return false;
  if (!std::equal(a.neighbour().begin(), a.neighbour().end(), b.neighbour().begin())) return false;

  auto less = [](const Vec3& p, const Vec3& q) {
    if (p.x != q.x) return p.x < q.x;
    if (p.y != q.y) return p.y < q.y;
    return p.z < q.z;
  };
  auto canonical = [&](const UnstructuredMesh& m, Label f) {
    std::array<Vec3, 4> pts{};
    for (std::size_t i = 0; i < 4; ++i) pts[i] = m.points()[m.faces()[f][i]];
    const auto first = std::min_element(pts.begin(), pts.end(), less);
    std::rotate(pts.begin(), first, pts.end());
    return pts;
  };
  for (Label f = 0; f < a.n_faces(); ++f) {
    if (canonical(a, f) != canonical(b, f)) return false;
  }
  return true;
}

UnstructuredMesh renumber_cells(const UnstructuredMesh& mesh, std::span<const Label> new_index) {
  const Label n = mesh.n_cells();
  if (new_index.size() != static_cast<std::size_t>(n)) throw DimensionError("renumbering length differs from cell count");
  {
    std::vector<char> hit(static_cast<std::size_t>(n), 0);
    for (Label v : new_index) {
      if (v < 0 || v >= n || hit[v]) throw MeshError("cell renumbering is not a permutation");
      hit[v] = 1;
    }
  }
  const auto faces = mesh.faces();
  const auto owner = mesh.owner();
  const auto neighbour = mesh.neighbour();

  struct Internal {
    Label owner, neighbour;
    QuadFace quad;
  };
  std::vector<Internal> internal;
  internal.reserve(neighbour.size());
  for (Label f = 0; f < mesh.n_internal_faces(); ++f) {
    Label o = new_index[owner[f]];
    Label nb = new_index[neighbour[f]];
    QuadFace q = faces[f];
    if (o > nb) {
      std::swap(o, nb);
      q = flipped(q);
    }
    internal.push_back({o, nb, q});
  }
  std::sort(internal.begin(), internal.end(), [](const Internal& a, const Internal& b) {
    return a.owner != b.owner ? a.owner < b.owner : a.neighbour < b.neighbour;
  });

  std::vector<QuadFace> out_faces;
  std::vector<Label> out_owner, out_neighbour;
  out_faces.reserve(faces.size());
  out_owner.reserve(faces.size());
  out_neighbour.reserve(internal.size());
  for (const auto& f : internal) {
    out_faces.push_back(f.quad);
    out_owner.push_back(f.owner);
    out_neighbour.push_back(f.neighbour);
  }
  std::vector<BoundaryPatch> patches(mesh.patches().begin(), mesh.patches().end());
  for (const auto& p : patches) {
    std::vector<Label> order(static_cast<std::size_t>(p.size));
    std::iota(order.begin(), order.end(), p.start);
    std::stable_sort(order.begin(), order.end(),
                     [&](Label x, Label y) { return new_index[owner[x]] < new_index[owner[y]]; });
    for (Label f : order) {
      out_faces.push_back(faces[f]);
      out_owner.push_back(new_index[owner[f]]);
    }
  }
  return UnstructuredMesh(n, std::vector<Vec3>(mesh.points().begin(), mesh.points().end()), std::move(out_faces),
                          std::move(out_owner), std::move(out_neighbour), std::move(patches));
}

}  // namespace mcflow
