// Finite simple graphs with unit edge lengths: storage, BFS distance
// fields, shells/tubes, components, and (labelled) pointed isomorphism.

#ifndef DRILL_GRAPH_HPP_
#define DRILL_GRAPH_HPP_

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace drill {

using Vertex = int;
using VertexSet = std::vector<Vertex>;  // kept sorted and unique

inline void normalize_set(VertexSet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

inline bool set_contains(const VertexSet& s, Vertex v) {
  return std::binary_search(s.begin(), s.end(), v);
}

class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : adj_(static_cast<std::size_t>(n)) {}

  int num_vertices() const { return static_cast<int>(adj_.size()); }
  std::size_t num_edges() const {
    std::size_t m = 0;
    for (auto& nb : adj_) m += nb.size();
    return m / 2;
  }

  Vertex add_vertex() {
    adj_.emplace_back();
    if (!labels_.empty()) labels_.emplace_back();
    return num_vertices() - 1;
  }

  void add_edge(Vertex u, Vertex v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw std::invalid_argument("loops are not allowed");
    if (has_edge(u, v)) return;
    adj_[u].insert(std::upper_bound(adj_[u].begin(), adj_[u].end(), v), v);
    adj_[v].insert(std::upper_bound(adj_[v].begin(), adj_[v].end(), u), u);
  }

  bool has_edge(Vertex u, Vertex v) const {
    check_vertex(u);
    check_vertex(v);
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
  }

  const std::vector<Vertex>& neighbors(Vertex v) const {
    check_vertex(v);
    return adj_[v];
  }

  int degree(Vertex v) const { return static_cast<int>(neighbors(v).size()); }

  void set_label(Vertex v, std::string label) {
    check_vertex(v);
    if (labels_.empty()) labels_.resize(adj_.size());
    labels_[v] = std::move(label);
  }

  const std::string& label(Vertex v) const {
    static const std::string empty;
    check_vertex(v);
    return labels_.empty() ? empty : labels_[v];
  }

  bool has_labels() const { return !labels_.empty(); }

  void check_vertex(Vertex v) const {
    if (v < 0 || v >= num_vertices()) throw std::out_of_range("vertex id out of range");
  }

  std::vector<std::pair<Vertex, Vertex>> edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    for (Vertex u = 0; u < num_vertices(); ++u)
      for (Vertex v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

 private:
  std::vector<std::vector<Vertex>> adj_;
  std::vector<std::string> labels_;
};

// BFS distances from a vertex set.  Unreachable vertices carry an explicit
// marker; reading one as a number throws instead of yielding a sentinel.
class DistanceField {
 public:
  static constexpr int kUnreachable = -1;

  DistanceField(const Graph& g, Vertex source) : DistanceField(g, VertexSet{source}) {}

  DistanceField(const Graph& g, VertexSet sources) : sources_(std::move(sources)) {
    if (sources_.empty()) throw std::invalid_argument("distances: empty source set");
    normalize_set(sources_);
    for (Vertex s : sources_) g.check_vertex(s);
    d_.assign(g.num_vertices(), kUnreachable);
    std::deque<Vertex> queue;
    for (Vertex s : sources_) {
      d_[s] = 0;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      Vertex u = queue.front();
      queue.pop_front();
      for (Vertex v : g.neighbors(u))
        if (d_[v] == kUnreachable) {
          d_[v] = d_[u] + 1;
          queue.push_back(v);
        }
    }
  }

  bool reachable(Vertex v) const { return d_[static_cast<std::size_t>(v)] != kUnreachable; }

  int at(Vertex v) const {
    int value = d_[static_cast<std::size_t>(v)];
    if (value == kUnreachable) throw std::domain_error("distance to unreachable vertex");
    return value;
  }

  int at_or(Vertex v, int fallback) const {
    int value = d_[static_cast<std::size_t>(v)];
    return value == kUnreachable ? fallback : value;
  }

  const VertexSet& sources() const { return sources_; }
  std::size_t size() const { return d_.size(); }

 private:
  VertexSet sources_;
  std::vector<int> d_;
};

inline DistanceField distances(const Graph& g, const VertexSet& sources) {
  return DistanceField(g, sources);
}

inline DistanceField distances(const Graph& g, Vertex source) {
  return DistanceField(g, VertexSet{source});
}

struct ShellDecomposition {
  VertexSet shell;         // d(. , W) == K
  VertexSet open_tube;     // d(. , W) <  K
  VertexSet neighborhood;  // d(. , W) <= K
};

inline ShellDecomposition sphere_and_tube(const Graph& g, const VertexSet& w, int k) {
  if (k < 0) throw std::invalid_argument("sphere_and_tube: negative radius");
  DistanceField d(g, w);
  ShellDecomposition out;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (!d.reachable(v)) continue;
    int dv = d.at(v);
    if (dv == k) out.shell.push_back(v);
    if (dv < k) out.open_tube.push_back(v);
    if (dv <= k) out.neighborhood.push_back(v);
  }
  return out;
}

inline std::vector<int> component_ids(const Graph& g) {
  std::vector<int> comp(g.num_vertices(), -1);
  int next = 0;
  for (Vertex s = 0; s < g.num_vertices(); ++s) {
    if (comp[s] != -1) continue;
    comp[s] = next;
    std::deque<Vertex> queue{s};
    while (!queue.empty()) {
      Vertex u = queue.front();
      queue.pop_front();
      for (Vertex v : g.neighbors(u))
        if (comp[v] == -1) {
          comp[v] = next;
          queue.push_back(v);
        }
    }
    ++next;
  }
  return comp;
}

inline int component_count(const Graph& g) {
  auto ids = component_ids(g);
  return ids.empty() ? 0 : 1 + *std::max_element(ids.begin(), ids.end());
}

inline bool is_connected(const Graph& g) { return component_count(g) <= 1; }

// Induced subgraph; returns the graph and the old-id list (new -> old).
inline std::pair<Graph, VertexSet> induced_subgraph(const Graph& g, VertexSet keep) {
  normalize_set(keep);
  std::vector<int> index(g.num_vertices(), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<int>(i);
  Graph out(static_cast<int>(keep.size()));
  for (Vertex u : keep) {
    if (g.has_labels()) out.set_label(index[u], g.label(u));
    for (Vertex v : g.neighbors(u))
      if (index[v] >= 0 && u < v) out.add_edge(index[u], index[v]);
  }
  return {std::move(out), std::move(keep)};
}

struct PointedBall {
  Graph graph;
  Vertex center = 0;
  int radius = 0;

  void validate() const {
    DistanceField d(graph, center);
    for (Vertex v = 0; v < graph.num_vertices(); ++v)
      if (!d.reachable(v) || d.at(v) > radius)
        throw std::logic_error("pointed ball has a vertex beyond its radius");
  }
};

inline PointedBall ball_around(const Graph& g, Vertex center, int radius) {
  DistanceField d(g, center);
  VertexSet keep;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (d.reachable(v) && d.at(v) <= radius) keep.push_back(v);
  auto [sub, old_ids] = induced_subgraph(g, keep);
  PointedBall b;
  b.graph = std::move(sub);
  b.center = static_cast<int>(std::lower_bound(old_ids.begin(), old_ids.end(), center) - old_ids.begin());
  b.radius = radius;
  return b;
}

// ---------------------------------------------------------------------------
// Isomorphism search with colour classes.  Vertices may only map to vertices
// of equal colour.  Degree/neighbourhood signatures are refined a few rounds
// before backtracking; exponential worst case accepted at this scale.
// ---------------------------------------------------------------------------

namespace iso_detail {

inline std::vector<std::uint64_t> refine_signatures(const Graph& g,
                                                    std::vector<std::uint64_t> sig,
                                                    int rounds) {
  std::vector<std::uint64_t> next(sig.size());
  for (int r = 0; r < rounds; ++r) {
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      std::vector<std::uint64_t> around;
      around.reserve(g.neighbors(v).size());
      for (Vertex u : g.neighbors(v)) around.push_back(sig[u]);
      std::sort(around.begin(), around.end());
      std::uint64_t h = sig[v] * 1099511628211ull + 14695981039346656037ull;
      for (auto x : around) h = (h ^ x) * 1099511628211ull;
      next[v] = h;
    }
    sig = next;
  }
  return sig;
}

}  // namespace iso_detail

// Finds a colour-preserving isomorphism a -> b; `pinned` prescribes images
// of selected a-vertices.  Returns the full vertex map or nothing.
inline std::optional<std::vector<Vertex>> find_isomorphism(
    const Graph& a, const Graph& b,
    const std::vector<std::uint64_t>& colour_a,
    const std::vector<std::uint64_t>& colour_b,
    const std::vector<std::pair<Vertex, Vertex>>& pinned = {}) {
  int n = a.num_vertices();
  if (n != b.num_vertices() || a.num_edges() != b.num_edges()) return std::nullopt;

  auto sig_a = iso_detail::refine_signatures(a, colour_a, 3);
  auto sig_b = iso_detail::refine_signatures(b, colour_b, 3);
  {
    auto ha = sig_a;
    auto hb = sig_b;
    std::sort(ha.begin(), ha.end());
    std::sort(hb.begin(), hb.end());
    if (ha != hb) return std::nullopt;
  }

  std::vector<Vertex> map_ab(n, -1), map_ba(n, -1);
  for (auto [x, y] : pinned) {
    if (sig_a[x] != sig_b[y]) return std::nullopt;
    if (map_ab[x] != -1 && map_ab[x] != y) return std::nullopt;
    if (map_ba[y] != -1 && map_ba[y] != x) return std::nullopt;
    map_ab[x] = y;
    map_ba[y] = x;
  }

  // Search order: BFS from the pinned seeds, unseen components afterwards.
  std::vector<Vertex> order;
  {
    std::vector<char> seen(n, 0);
    std::deque<Vertex> queue;
    auto push = [&](Vertex v) {
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    };
    for (auto [x, y] : pinned) { (void)y; push(x); }
    Vertex scan = 0;
    while (static_cast<int>(order.size()) < n) {
      if (queue.empty()) {
        while (scan < n && seen[scan]) ++scan;
        push(scan);
      }
      Vertex u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (Vertex w : a.neighbors(u)) push(w);
    }
    std::vector<Vertex> unpinned;
    for (Vertex v : order)
      if (map_ab[v] == -1) unpinned.push_back(v);
    order = std::move(unpinned);
  }

  auto consistent = [&](Vertex x, Vertex y) -> bool {
    if (sig_a[x] != sig_b[y]) return false;
    for (Vertex u : a.neighbors(x))
      if (map_ab[u] != -1 && !b.has_edge(y, map_ab[u])) return false;
    for (Vertex w : b.neighbors(y))
      if (map_ba[w] != -1 && !a.has_edge(x, map_ba[w])) return false;
    return true;
  };

  std::size_t m = order.size();
  std::vector<std::vector<Vertex>> cand(m);
  std::vector<std::size_t> idx(m, 0);
  std::vector<char> fresh(m, 1);
  std::size_t i = 0;
  while (i < m) {
    Vertex x = order[i];
    if (fresh[i]) {
      cand[i].clear();
      for (Vertex y = 0; y < n; ++y)
        if (map_ba[y] == -1 && consistent(x, y)) cand[i].push_back(y);
      idx[i] = 0;
      fresh[i] = 0;
    }
    bool advanced = false;
    while (idx[i] < cand[i].size()) {
      Vertex y = cand[i][idx[i]++];
      if (map_ba[y] != -1 || !consistent(x, y)) continue;
      map_ab[x] = y;
      map_ba[y] = x;
      ++i;
      if (i < m) fresh[i] = 1;
      advanced = true;
      break;
    }
    if (!advanced) {
      fresh[i] = 1;
      if (i == 0) return std::nullopt;
      --i;
      Vertex px = order[i];
      map_ba[map_ab[px]] = -1;
      map_ab[px] = -1;
    }
  }
  return map_ab;
}

// Pointed isomorphism of equal-radius balls: centre to centre, labels to
// labels when either ball carries them.
inline std::optional<std::vector<Vertex>> pointed_isomorphic(const PointedBall& a,
                                                             const PointedBall& b) {
  if (a.radius != b.radius) throw std::invalid_argument("pointed_isomorphic: radius mismatch");
  if (a.graph.num_vertices() != b.graph.num_vertices()) return std::nullopt;
  DistanceField da(a.graph, a.center), db(b.graph, b.center);
  auto colour = [](const Graph& g, const DistanceField& d) {
    std::vector<std::uint64_t> c(g.num_vertices());
    std::hash<std::string> hs;
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      std::uint64_t h = 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(d.at(v));
      if (g.has_labels()) h = h * 1099511628211ull + hs(g.label(v));
      c[v] = h;
    }
    return c;
  };
  return find_isomorphism(a.graph, b.graph, colour(a.graph, da), colour(b.graph, db),
                          {{a.center, b.center}});
}

}  // namespace drill

#endif  // DRILL_GRAPH_HPP_
