#include "mcflow/partition/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "mcflow/common/error.hpp"

namespace mcflow {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void shuffle(std::vector<Label>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

std::int64_t total_weight(const CellGraph& g) {
  if (g.vertex_weights.empty()) return g.n_nodes();
  return std::accumulate(g.vertex_weights.begin(), g.vertex_weights.end(), std::int64_t{0});
}

Label max_vertex_weight(const CellGraph& g) {
  if (g.vertex_weights.empty()) return 1;
  return *std::max_element(g.vertex_weights.begin(), g.vertex_weights.end());
}

// Heavy-edge matching; returns the coarse graph and fills coarse_of.
CellGraph coarsen(const CellGraph& g, std::mt19937_64& rng, std::int64_t max_vw, std::vector<Label>& coarse_of) {
  const Label n = g.n_nodes();
  std::vector<Label> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  std::vector<Label> match(static_cast<std::size_t>(n), -1);
  for (Label v : order) {
    if (match[v] >= 0) continue;
    Label best = -1;
    Label best_w = -1;
    for (Label k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
      const Label u = g.adjacency[k];
      if (match[u] >= 0) continue;
      if (static_cast<std::int64_t>(g.vertex_weight(v)) + g.vertex_weight(u) > max_vw) continue;
      const Label w = g.edge_weight(static_cast<std::size_t>(k));
      if (w > best_w || (w == best_w && g.vertex_weight(u) < g.vertex_weight(best))) {
        best = u;
        best_w = w;
      }
    }
    if (best >= 0) {
      match[v] = best;
      match[best] = v;
    } else {
      match[v] = v;
    }
  }

  coarse_of.assign(static_cast<std::size_t>(n), -1);
  Label nc = 0;
  for (Label v = 0; v < n; ++v) {
    if (coarse_of[v] >= 0) continue;
    coarse_of[v] = nc;
    coarse_of[match[v]] = nc;
    ++nc;
  }

  CellGraph c;
  c.offsets.assign(static_cast<std::size_t>(nc) + 1, 0);
  c.vertex_weights.assign(static_cast<std::size_t>(nc), 0);
  std::vector<Label> slot(static_cast<std::size_t>(nc), -1);
  std::vector<std::pair<Label, Label>> row;
  Label next = 0;
  for (Label v = 0; v < n; ++v) {
    if (coarse_of[v] != next) continue;  // first member of coarse node `next`
    const Label members[2] = {v, match[v]};
    const int m = match[v] == v ? 1 : 2;
    row.clear();
    for (int i = 0; i < m; ++i) {
      const Label x = members[i];
      c.vertex_weights[next] += g.vertex_weight(x);
      for (Label k = g.offsets[x]; k < g.offsets[x + 1]; ++k) {
        const Label cu = coarse_of[g.adjacency[k]];
        if (cu == next) continue;
        const Label w = g.edge_weight(static_cast<std::size_t>(k));
        if (slot[cu] < 0) {
          slot[cu] = static_cast<Label>(row.size());
          row.emplace_back(cu, w);
        } else {
          row[slot[cu]].second += w;
        }
      }
    }
    std::sort(row.begin(), row.end());
    for (auto [cu, w] : row) {
      c.adjacency.push_back(cu);
      c.edge_weights.push_back(w);
      slot[cu] = -1;
    }
    c.offsets[next + 1] = static_cast<Label>(c.adjacency.size());
    ++next;
  }
  return c;
}

struct Window {
  std::int64_t target = 0;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  Label count_lo = 0;
  Label count_hi = 0;
};

// Two-way partition state with per-node internal/external edge weights.
class Bisection {
 public:
  Bisection(const CellGraph& g, std::vector<std::uint8_t> side, const Window& win)
      : g_(g), side_(std::move(side)), win_(win) {
    recompute();
  }

  [[nodiscard]] const std::vector<std::uint8_t>& side() const { return side_; }
  [[nodiscard]] std::int64_t cut() const { return cut_; }

  /// Lexicographic objective: infeasibility, then cut, then imbalance.
  [[nodiscard]] std::array<std::int64_t, 3> key() const { return {infeasibility(w0_, count0_), cut_, std::abs(w0_ - win_.target)}; }

  void refine(int passes, Label stall_limit) {
    for (int p = 0; p < passes; ++p) {
      if (!pass(stall_limit)) break;
    }
  }

 private:
  [[nodiscard]] std::int64_t infeasibility(std::int64_t w0, Label c0) const {
    std::int64_t bad = 0;
    if (w0 < win_.lo) bad += win_.lo - w0;
    if (w0 > win_.hi) bad += w0 - win_.hi;
    if (c0 < win_.count_lo) bad += win_.count_lo - c0;
    if (c0 > win_.count_hi) bad += c0 - win_.count_hi;
    return bad;
  }

  void recompute() {
    const Label n = g_.n_nodes();
    ext_.assign(static_cast<std::size_t>(n), 0);
    int_.assign(static_cast<std::size_t>(n), 0);
    w0_ = 0;
    count0_ = 0;
    cut_ = 0;
    for (Label v = 0; v < n; ++v) {
      if (side_[v] == 0) {
        w0_ += g_.vertex_weight(v);
        ++count0_;
      }
      for (Label k = g_.offsets[v]; k < g_.offsets[v + 1]; ++k) {
        const Label w = g_.edge_weight(static_cast<std::size_t>(k));
        if (side_[g_.adjacency[k]] != side_[v]) {
          ext_[v] += w;
        } else {
          int_[v] += w;
        }
      }
      cut_ += ext_[v];
    }
    cut_ /= 2;
  }

  [[nodiscard]] std::int64_t gain(Label v) const { return ext_[v] - int_[v]; }

  // One FM pass; returns true when the partition improved.
  bool pass(Label stall_limit) {
    const Label n = g_.n_nodes();
    using Entry = std::pair<std::int64_t, Label>;  // (-gain, node)
    std::set<Entry> queue[2];
    std::vector<std::uint8_t> locked(static_cast<std::size_t>(n), 0);
    for (Label v = 0; v < n; ++v) {
      if (ext_[v] > 0) queue[side_[v]].insert({-gain(v), v});
    }

    std::vector<Label> moves;
    auto best_key = key();
    std::size_t best_len = 0;
    Label stall = 0;

    while (true) {
      const auto cur_bad = infeasibility(w0_, count0_);
      Label pick = -1;
      std::int64_t pick_gain = std::numeric_limits<std::int64_t>::min();
      std::int64_t pick_weight = -1;
      for (int s = 0; s < 2; ++s) {
        if (queue[s].empty()) continue;
        const Label v = queue[s].begin()->second;
        const std::int64_t vw = g_.vertex_weight(v);
        const std::int64_t nw0 = s == 0 ? w0_ - vw : w0_ + vw;
        const Label nc0 = s == 0 ? count0_ - 1 : count0_ + 1;
        const auto bad = infeasibility(nw0, nc0);
        if (bad > 0 && bad >= cur_bad) continue;
        const std::int64_t g = gain(v);
        const std::int64_t side_weight = s == 0 ? w0_ : -w0_;
        if (g > pick_gain || (g == pick_gain && side_weight > pick_weight)) {
          pick = v;
          pick_gain = g;
          pick_weight = side_weight;
        }
      }
      if (pick < 0) break;

      const int from = side_[pick];
      queue[from].erase({-gain(pick), pick});
      locked[pick] = 1;
      side_[pick] = static_cast<std::uint8_t>(1 - from);
      const std::int64_t vw = g_.vertex_weight(pick);
      if (from == 0) {
        w0_ -= vw;
        --count0_;
      } else {
        w0_ += vw;
        ++count0_;
      }
      cut_ -= gain(pick);
      std::swap(ext_[pick], int_[pick]);
      for (Label k = g_.offsets[pick]; k < g_.offsets[pick + 1]; ++k) {
        const Label u = g_.adjacency[k];
        const Label w = g_.edge_weight(static_cast<std::size_t>(k));
        const bool was_boundary = ext_[u] > 0;
        if (!locked[u] && was_boundary) queue[side_[u]].erase({-gain(u), u});
        if (side_[u] == side_[pick]) {
          int_[u] += w;
          ext_[u] -= w;
        } else {
          ext_[u] += w;
          int_[u] -= w;
        }
        if (!locked[u] && ext_[u] > 0) queue[side_[u]].insert({-gain(u), u});
      }
      moves.push_back(pick);

      const auto k = key();
      if (k < best_key) {
        best_key = k;
        best_len = moves.size();
        stall = 0;
      } else if (++stall > stall_limit) {
        break;
      }
    }

    for (std::size_t i = moves.size(); i > best_len; --i) {
      const Label v = moves[i - 1];
      side_[v] = static_cast<std::uint8_t>(1 - side_[v]);
    }
    recompute();
    return best_len > 0;
  }

  const CellGraph& g_;
  std::vector<std::uint8_t> side_;
  Window win_;
  std::vector<std::int64_t> ext_, int_;
  std::int64_t w0_ = 0;
  Label count0_ = 0;
  std::int64_t cut_ = 0;
};

Label pseudo_peripheral(const CellGraph& g, Label start) {
  const Label n = g.n_nodes();
  std::vector<Label> dist(static_cast<std::size_t>(n));
  Label root = start;
  Label ecc = -1;
  for (int iter = 0; iter < 8; ++iter) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<Label> q;
    q.push(root);
    dist[root] = 0;
    Label far = root;
    while (!q.empty()) {
      const Label v = q.front();
      q.pop();
      if (dist[v] > dist[far] || (dist[v] == dist[far] && g.degree(v) < g.degree(far))) far = v;
      for (Label u : g.neighbours(v)) {
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
      }
    }
    if (dist[far] <= ecc) break;
    ecc = dist[far];
    root = far;
  }
  return root;
}

// Greedy graph growing of part 0 from `start` until it reaches the target.
std::vector<std::uint8_t> grow(const CellGraph& g, Label start, const Window& win) {
  const Label n = g.n_nodes();
  std::vector<std::uint8_t> side(static_cast<std::size_t>(n), 1);
  std::vector<std::int64_t> to_region(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> to_rest(static_cast<std::size_t>(n), 0);
  for (Label v = 0; v < n; ++v) {
    for (Label k = g.offsets[v]; k < g.offsets[v + 1]; ++k) to_rest[v] += g.edge_weight(static_cast<std::size_t>(k));
  }
  using Entry = std::pair<std::int64_t, Label>;
  std::set<Entry> frontier;
  std::vector<std::uint8_t> in_frontier(static_cast<std::size_t>(n), 0);

  std::int64_t w0 = 0;
  Label c0 = 0;
  Label scan = 0;
  auto add = [&](Label v) {
    side[v] = 0;
    w0 += g.vertex_weight(v);
    ++c0;
    for (Label k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
      const Label u = g.adjacency[k];
      if (side[u] == 0) continue;
      const Label w = g.edge_weight(static_cast<std::size_t>(k));
      if (in_frontier[u]) frontier.erase({-(to_region[u] - to_rest[u]), u});
      to_region[u] += w;
      to_rest[u] -= w;
      frontier.insert({-(to_region[u] - to_rest[u]), u});
      in_frontier[u] = 1;
    }
  };
  add(start);
  while (c0 < win.count_hi && (w0 < win.target || c0 < win.count_lo)) {
    Label v = -1;
    if (!frontier.empty()) {
      v = frontier.begin()->second;
      frontier.erase(frontier.begin());
      in_frontier[v] = 0;
    } else {
      while (scan < n && side[scan] == 0) ++scan;
      if (scan >= n) break;
      v = scan;
    }
    // Stop before overshooting when the next node lands further from target.
    const std::int64_t next = w0 + g.vertex_weight(v);
    if (c0 >= win.count_lo && next - win.target > win.target - w0) break;
    add(v);
  }
  return side;
}

}  // namespace

std::vector<std::uint8_t> MultilevelBisection::bisect(const CellGraph& graph, double fraction, Label min0, Label min1,
                                              std::uint64_t seed) const {
  const Label n = graph.n_nodes();
  if (min0 + min1 > n) throw PartitionError("cannot bisect " + std::to_string(n) + " nodes into the requested parts");
  std::mt19937_64 rng(seed);

  std::vector<CellGraph> levels;
  std::vector<std::vector<Label>> maps;
  const std::int64_t total = total_weight(graph);
  const auto max_vw = std::max<std::int64_t>(
      max_vertex_weight(graph), static_cast<std::int64_t>(1.5 * static_cast<double>(total) / options_.coarsen_to));
  {
    const CellGraph* cur = &graph;
    while (cur->n_nodes() > options_.coarsen_to) {
      std::vector<Label> map;
      CellGraph next = coarsen(*cur, rng, max_vw, map);
      if (next.n_nodes() > static_cast<Label>(0.9 * cur->n_nodes())) break;
      maps.push_back(std::move(map));
      levels.push_back(std::move(next));
      cur = &levels.back();
    }
  }

  const double target = fraction * static_cast<double>(total);
  auto window_for = [&](const CellGraph& g, Label nodes_lo, Label nodes_hi) {
    const double tol =
        std::max(options_.bisection_tolerance * static_cast<double>(total), static_cast<double>(max_vertex_weight(g)));
    Window w;
    w.target = std::llround(target);
    w.lo = static_cast<std::int64_t>(std::ceil(target - tol));
    w.hi = static_cast<std::int64_t>(std::floor(target + tol));
    w.count_lo = nodes_lo;
    w.count_hi = nodes_hi;
    return w;
  };
  // Node-count constraints only bind on the finest graph.
  auto coarse_window = [&](const CellGraph& g) { return window_for(g, 1, std::max<Label>(1, g.n_nodes() - 1)); };
  const Label stall = std::max<Label>(60, n / 50);

  const CellGraph& coarsest = levels.empty() ? graph : levels.back();
  const Window cw = levels.empty() ? window_for(graph, min0, n - min1) : coarse_window(coarsest);

  std::vector<std::uint8_t> best;
  std::array<std::int64_t, 3> best_key{};
  const Label cn = coarsest.n_nodes();
  for (int t = 0; t < options_.initial_trials; ++t) {
    const Label start = t == 0 ? pseudo_peripheral(coarsest, 0) : static_cast<Label>(rng() % static_cast<std::uint64_t>(cn));
    Bisection b(coarsest, grow(coarsest, start, cw), cw);
    b.refine(options_.refine_passes, stall);
    if (best.empty() || b.key() < best_key) {
      best_key = b.key();
      best = b.side();
    }
  }

  for (std::size_t l = levels.size(); l-- > 0;) {
    const CellGraph& fine = l == 0 ? graph : levels[l - 1];
    std::vector<std::uint8_t> side(static_cast<std::size_t>(fine.n_nodes()));
    for (Label v = 0; v < fine.n_nodes(); ++v) side[v] = best[maps[l][v]];
    const Window w = l == 0 ? window_for(graph, min0, n - min1) : coarse_window(fine);
    Bisection b(fine, std::move(side), w);
    b.refine(options_.refine_passes, stall);
    best = b.side();
  }
  return best;
}

std::vector<Label> MultilevelBisection::partition(const CellGraph& graph, Label n_parts, std::uint64_t seed) const {
  const Label n = graph.n_nodes();
  if (n_parts < 1) throw PartitionError("number of parts must be at least 1");
  if (n_parts > n) {
    throw PartitionError("cannot split " + std::to_string(n) + " nodes into " + std::to_string(n_parts) + " parts");
  }
  std::vector<Label> part(static_cast<std::size_t>(n), 0);

  struct Task {
    CellGraph graph;
    std::vector<Label> ids;
    Label parts;
    Label first;
  };
  std::vector<Task> stack;
  {
    std::vector<Label> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    stack.push_back({graph, std::move(ids), n_parts, 0});
  }
  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();
    if (task.parts == 1) {
      for (Label id : task.ids) part[id] = task.first;
      continue;
    }
    const Label k0 = task.parts / 2;
    const Label k1 = task.parts - k0;
    const auto side = bisect(task.graph, static_cast<double>(k0) / task.parts, k0, k1,
                             mix_seed(seed, static_cast<std::uint64_t>(task.first) * 131 + static_cast<std::uint64_t>(task.parts)));
    std::vector<Label> local[2], ids[2];
    for (Label v = 0; v < task.graph.n_nodes(); ++v) {
      local[side[v]].push_back(v);
      ids[side[v]].push_back(task.ids[v]);
    }
    stack.push_back({induced_subgraph(task.graph, local[1]), std::move(ids[1]), k1, task.first + k0});
    stack.push_back({induced_subgraph(task.graph, local[0]), std::move(ids[0]), k0, task.first});
  }
  return part;
}

std::vector<Label> IndexBlockPartitioner::partition(const CellGraph& graph, Label n_parts, std::uint64_t) const {
  const Label n = graph.n_nodes();
  if (n_parts < 1) throw PartitionError("number of parts must be at least 1");
  if (n_parts > n) {
    throw PartitionError("cannot split " + std::to_string(n) + " nodes into " + std::to_string(n_parts) + " parts");
  }
  std::vector<Label> part(static_cast<std::size_t>(n));
  for (Label v = 0; v < n; ++v) {
    part[v] = static_cast<Label>((static_cast<std::int64_t>(v) * n_parts) / n);
  }
  return part;
}

std::vector<Label> partition_graph(const CellGraph& graph, Label n_parts, std::uint64_t seed) {
  return MultilevelBisection{}.partition(graph, n_parts, seed);
}

std::int64_t edge_cut(const CellGraph& graph, std::span<const Label> part) {
  if (part.size() != static_cast<std::size_t>(graph.n_nodes())) throw DimensionError("part vector length mismatch");
  std::int64_t cut = 0;
  for (Label v = 0; v < graph.n_nodes(); ++v) {
    for (Label k = graph.offsets[v]; k < graph.offsets[v + 1]; ++k) {
      const Label u = graph.adjacency[k];
      if (u > v && part[u] != part[v]) cut += graph.edge_weight(static_cast<std::size_t>(k));
    }
  }
  return cut;
}

}  // namespace mcflow
