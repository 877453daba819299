// Model-space generators: regular trees, the square grid, {p,q} tilings
// grown by layered face completion over a planar rotation map, and Cayley
// balls of surface groups via Dehn reduction.  Axes and translate families.

#ifndef DRILL_SPACES_HPP_
#define DRILL_SPACES_HPP_

#include <cassert>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "drill/graph.hpp"
#include "drill/numeric.hpp"
#include "drill/report.hpp"

namespace drill {

// ---------------------------------------------------------------------------
// Generator kinds
// ---------------------------------------------------------------------------

struct TreeKind { int valence = 3; };
struct GridKind {};
struct TilingKind { int p = 7, q = 3; };
struct SurfaceKind { int genus = 2; };  // Cayley graph, Dehn-reduced words

struct SpaceGenerator {
  std::variant<TreeKind, GridKind, TilingKind, SurfaceKind> kind;

  static SpaceGenerator tree(int valence) {
    if (valence < 3) throw std::invalid_argument("tree valence must be >= 3");
    return {TreeKind{valence}};
  }
  static SpaceGenerator grid() { return {GridKind{}}; }
  static SpaceGenerator tiling(int p, int q) {
    if (p < 3 || q < 3 || (p - 2) * (q - 2) < 4)
      throw std::invalid_argument("tiling{p,q} must satisfy (p-2)(q-2) >= 4");
    return {TilingKind{p, q}};
  }
  static SpaceGenerator surface(int genus) {
    if (genus < 2) throw std::invalid_argument("surface genus must be >= 2");
    return {SurfaceKind{genus}};
  }

  std::string describe() const {
    std::ostringstream os;
    if (auto* t = std::get_if<TreeKind>(&kind)) os << "tree:" << t->valence;
    if (std::get_if<GridKind>(&kind)) os << "grid";
    if (auto* t = std::get_if<TilingKind>(&kind)) os << "tiling:" << t->p << "," << t->q;
    if (auto* s = std::get_if<SurfaceKind>(&kind)) os << "surface:" << s->genus;
    return os.str();
  }

  static SpaceGenerator parse(const std::string& s) {
    auto colon = s.find(':');
    std::string head = s.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (head == "tree") return tree(std::stoi(args));
    if (head == "grid") return grid();
    if (head == "tiling") {
      auto comma = args.find(',');
      return tiling(std::stoi(args.substr(0, comma)), std::stoi(args.substr(comma + 1)));
    }
    if (head == "surface") return surface(std::stoi(args));
    throw std::invalid_argument("unsupported space kind: " + s);
  }
};

// ---------------------------------------------------------------------------
// Tree balls.  Root 0, children assigned ids in BFS order.
// ---------------------------------------------------------------------------

namespace spaces_detail {

inline PointedBall tree_ball(int valence, int radius) {
  Graph g(1);
  std::vector<int> layer{0};
  std::vector<int> depth{0};
  for (int r = 1; r <= radius; ++r) {
    std::vector<int> next;
    for (Vertex v : layer) {
      int children = (v == 0) ? valence : valence - 1;
      for (int c = 0; c < children; ++c) {
        Vertex u = g.add_vertex();
        g.add_edge(v, u);
        next.push_back(u);
      }
    }
    layer = std::move(next);
  }
  PointedBall b;
  b.graph = std::move(g);
  b.center = 0;
  b.radius = radius;
  return b;
}

// Grid (Z^2) L1 ball.  Canonical ids: points ordered by (|x|+|y|, x, y).
inline PointedBall grid_ball(int radius) {
  std::vector<std::pair<int, int>> pts;
  for (int x = -radius; x <= radius; ++x)
    for (int y = -(radius - std::abs(x)); y <= radius - std::abs(x); ++y)
      pts.emplace_back(x, y);
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) {
    int ra = std::abs(a.first) + std::abs(a.second);
    int rb = std::abs(b.first) + std::abs(b.second);
    return std::tie(ra, a.first, a.second) < std::tie(rb, b.first, b.second);
  });
  std::map<std::pair<int, int>, Vertex> id;
  Graph g(static_cast<int>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) id[pts[i]] = static_cast<Vertex>(i);
  for (auto& [pt, v] : id) {
    auto [x, y] = pt;
    for (auto [dx, dy] : {std::pair{1, 0}, {0, 1}}) {
      auto it = id.find({x + dx, y + dy});
      if (it != id.end()) g.add_edge(v, it->second);
    }
  }
  PointedBall b;
  b.graph = std::move(g);
  b.center = id.at({0, 0});
  b.radius = radius;
  return b;
}

// -------------------------------------------------------------------------
// {p,q} tiling grower.  Planar rotation map: rot[v] is the CCW-ordered arc
// of known neighbours of v (contiguous in the eventual cyclic order).
// Faces are traced with  next(u -> v) = (v -> predecessor of u in rot[v]),
// so each face is a CCW p-cycle.  Saturating a vertex closes every face in
// its rotation; repeating per layer grows the ball deterministically.
// -------------------------------------------------------------------------

class TilingGrower {
 public:
  TilingGrower(int p, int q) : p_(p), q_(q) {
    Vertex zero = new_vertex();
    Vertex one = new_vertex();
    rot_[zero].push_back(one);
    rot_[one].push_back(zero);
  }

  // Saturates `rounds` successive snapshots of the vertex set; after k
  // rounds every vertex at tiling distance <= k-1 of vertex 0 is interior.
  void grow(int rounds) {
    for (int r = 0; r < rounds; ++r) {
      std::size_t snapshot = rot_.size();
      for (Vertex v = 0; v < static_cast<Vertex>(snapshot); ++v) saturate(v);
    }
  }

  // Saturates every vertex within graph distance `radius` of vertex 0,
  // iterating to a fixpoint.  Distances in the grown patch then agree with
  // the tiling up to radius+1, and the radius-`radius` ball is induced
  // complete (shell-to-shell edges included).
  void grow_ball(int radius) {
    while (true) {
      std::vector<int> dist(rot_.size(), -1);
      std::deque<Vertex> queue{0};
      dist[0] = 0;
      while (!queue.empty()) {
        Vertex u = queue.front();
        queue.pop_front();
        if (dist[u] >= radius) continue;
        for (Vertex v : rot_[u])
          if (dist[v] == -1) {
            dist[v] = dist[u] + 1;
            queue.push_back(v);
          }
      }
      bool changed = false;
      std::size_t snapshot = rot_.size();
      for (Vertex v = 0; v < static_cast<Vertex>(snapshot); ++v)
        if (dist[v] != -1 && dist[v] <= radius && !saturated_[v]) {
          saturate(v);
          changed = true;
        }
      if (!changed) return;
    }
  }

  Graph to_graph() const {
    Graph g(static_cast<int>(rot_.size()));
    for (Vertex v = 0; v < static_cast<Vertex>(rot_.size()); ++v)
      for (Vertex u : rot_[v])
        if (v < u) g.add_edge(v, u);
    return g;
  }

  bool saturated(Vertex v) const { return saturated_[v] != 0; }

  // The cyclic order at v is determined as soon as its degree reaches q.
  bool complete(Vertex v) const { return static_cast<int>(rot_[v].size()) == q_; }

  const std::vector<Vertex>& rotation(Vertex v) const { return rot_[v]; }

  // Walks the face left of the dart (u -> v); empty if it leaves built area.
  std::vector<Vertex> trace_face(Vertex u, Vertex v) const {
    std::vector<Vertex> face{u, v};
    Vertex pu = u, pv = v;
    for (int steps = 0; steps < p_; ++steps) {
      int i = index_of(pv, pu);
      if (!complete(pv) && i == 0) return {};
      Vertex w = rot_[pv][(i + static_cast<int>(rot_[pv].size()) - 1) % rot_[pv].size()];
      if (w == face.front() && pv == face.back()) return face;
      face.push_back(w);
      pu = pv;
      pv = w;
      if (face.size() > static_cast<std::size_t>(p_) + 1) break;
    }
    throw std::logic_error("tiling face trace exceeded p");
  }

 private:
  Vertex new_vertex() {
    rot_.emplace_back();
    saturated_.push_back(0);
    return static_cast<Vertex>(rot_.size() - 1);
  }

  int index_of(Vertex v, Vertex nb) const {
    for (std::size_t i = 0; i < rot_[v].size(); ++i)
      if (rot_[v][i] == nb) return static_cast<int>(i);
    throw std::logic_error("tiling rotation: missing neighbour");
  }

  // Completes the face whose CCW boundary extends the path w0, w1, ... wk.
  void close_face(std::vector<Vertex> path) {
    // Forward: last dart (path[L-2] -> path[L-1]).
    while (static_cast<int>(path.size()) <= p_) {
      Vertex u = path[path.size() - 2], x = path.back();
      int i = index_of(x, u);
      if (i == 0 && !complete(x)) break;  // stuck: u first in arc
      Vertex w = rot_[x][(i + static_cast<int>(rot_[x].size()) - 1) % rot_[x].size()];
      path.push_back(w);
      if (w == path.front()) {
        if (static_cast<int>(path.size()) != p_ + 1)
          throw std::logic_error("tiling: closed face of wrong length");
        return;  // face already complete
      }
    }
    // Backward: first dart (path[0] -> path[1]).
    while (static_cast<int>(path.size()) <= p_) {
      Vertex y = path.front(), w1 = path[1];
      int i = index_of(y, w1);
      if (i + 1 == static_cast<int>(rot_[y].size()) && !complete(y)) break;
      Vertex t = rot_[y][(i + 1) % rot_[y].size()];
      path.insert(path.begin(), t);
      if (t == path.back())
        throw std::logic_error("tiling: face closed during backward walk");
    }
    if (static_cast<int>(path.size()) > p_)
      throw std::logic_error("tiling: face walk exceeded p");

    // Bridge path.back() -> fresh chain -> path.front().
    int missing = p_ - static_cast<int>(path.size());
    Vertex fwd = path.back(), bwd = path.front();
    if (static_cast<int>(rot_[fwd].size()) >= q_ || static_cast<int>(rot_[bwd].size()) >= q_)
      throw std::logic_error("tiling: bridging would exceed vertex degree");
    std::vector<Vertex> chain;
    for (int i = 0; i < missing; ++i) chain.push_back(new_vertex());
    chain.push_back(bwd);

    // Attach first new edge at the forward end, before path[L-2].
    Vertex first = chain.front();
    if (rot_[fwd].front() != path[path.size() - 2])
      throw std::logic_error("tiling: forward end arc mismatch");
    rot_[fwd].insert(rot_[fwd].begin(), first);
    // Fresh chain vertices: rotation arc [face-successor, face-predecessor].
    Vertex prev = fwd;
    for (int i = 0; i < missing; ++i) {
      Vertex cur = chain[i];
      Vertex nxt = chain[i + 1];
      rot_[cur] = {nxt, prev};
      prev = cur;
    }
    // Attach the final edge at the backward end, after path[1].
    if (rot_[bwd].back() != path[1])
      throw std::logic_error("tiling: backward end arc mismatch");
    rot_[bwd].push_back(prev);
  }

  void saturate(Vertex v) {
    if (saturated_[v]) return;
    // Close faces at all inner corners, then extend around v.
    for (int guard = 0; guard < 4 * q_ + 8; ++guard) {
      int deg = static_cast<int>(rot_[v].size());
      bool did = false;
      for (int i = 0; i + 1 < deg; ++i) {
        close_face({rot_[v][i + 1], v, rot_[v][i]});
        if (static_cast<int>(rot_[v].size()) != deg) { did = true; break; }
      }
      deg = static_cast<int>(rot_[v].size());
      if (!did && deg < q_) {
        close_face({v, rot_[v].back()});
        did = true;
      }
      if (!did && deg == q_) {
        close_face({rot_[v][0], v, rot_[v][q_ - 1]});
        saturated_[v] = 1;
        return;
      }
    }
    throw std::logic_error("tiling: saturation did not converge");
  }

  int p_, q_;
  std::vector<std::vector<Vertex>> rot_;
  std::vector<char> saturated_;
};

inline PointedBall tiling_ball(int p, int q, int radius) {
  TilingGrower grower(p, q);
  grower.grow_ball(radius);
  Graph full = grower.to_graph();
  PointedBall b = ball_around(full, 0, radius);
  return b;
}

// -------------------------------------------------------------------------
// Surface group Cayley balls via Dehn reduction.  Generators a_1,b_1,...,
// a_g,b_g; letters 0..4g-1 with inverse(x) = x ^ 1 packed as (a,A,b,B,...).
// -------------------------------------------------------------------------

struct DehnTable {
  int genus;
  std::vector<std::vector<int>> pieces;       // all cyclic subwords of R, R^-1, length > half
  std::vector<std::vector<int>> replacements; // complementary shorter words
  std::vector<std::vector<int>> half_pieces;  // exactly half
  std::vector<std::vector<int>> half_repl;

  static int inverse(int letter) { return letter ^ 1; }

  static std::vector<int> invert(const std::vector<int>& w) {
    std::vector<int> out;
    for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(inverse(*it));
    return out;
  }

  explicit DehnTable(int g) : genus(g) {
    // R = prod [a_i, b_i],  letters: a_i = 4i, A_i = 4i+1, b_i = 4i+2, B_i = 4i+3.
    std::vector<int> relator;
    for (int i = 0; i < g; ++i) {
      relator.push_back(4 * i);
      relator.push_back(4 * i + 2);
      relator.push_back(4 * i + 1);
      relator.push_back(4 * i + 3);
    }
    int n = static_cast<int>(relator.size());
    int half = n / 2;
    for (const auto& base : {relator, invert(relator)}) {
      for (int rotn = 0; rotn < n; ++rotn) {
        std::vector<int> rot;
        for (int i = 0; i < n; ++i) rot.push_back(base[(rotn + i) % n]);
        for (int len = half; len < n; ++len) {
          std::vector<int> piece(rot.begin(), rot.begin() + len);
          std::vector<int> rest(rot.begin() + len, rot.end());
          // piece * rest = R' = 1, so piece = rest^-1.
          auto repl = invert(rest);
          if (len > half) {
            pieces.push_back(piece);
            replacements.push_back(repl);
          } else {
            half_pieces.push_back(piece);
            half_repl.push_back(repl);
          }
        }
      }
    }
  }
};

inline void free_reduce(std::vector<int>& w) {
  std::vector<int> out;
  for (int x : w) {
    if (!out.empty() && out.back() == DehnTable::inverse(x))
      out.pop_back();
    else
      out.push_back(x);
  }
  w = std::move(out);
}

inline bool replace_first(std::vector<int>& w, const std::vector<std::vector<int>>& pats,
                          const std::vector<std::vector<int>>& repls, bool lex_only) {
  for (std::size_t pi = 0; pi < pats.size(); ++pi) {
    const auto& pat = pats[pi];
    if (pat.size() > w.size()) continue;
    for (std::size_t at = 0; at + pat.size() <= w.size(); ++at) {
      if (!std::equal(pat.begin(), pat.end(), w.begin() + at)) continue;
      std::vector<int> cand(w.begin(), w.begin() + at);
      cand.insert(cand.end(), repls[pi].begin(), repls[pi].end());
      cand.insert(cand.end(), w.begin() + at + pat.size(), w.end());
      free_reduce(cand);
      if (!lex_only || cand < w) {
        w = std::move(cand);
        return true;
      }
    }
  }
  return false;
}

// Dehn reduction to a geodesic word, then exact-half replacements with a
// lexicographic gate as a cheap normal-form heuristic.
inline std::vector<int> dehn_reduce(std::vector<int> w, const DehnTable& table) {
  free_reduce(w);
  while (replace_first(w, table.pieces, table.replacements, false)) {}
  for (int guard = 0; guard < 200; ++guard) {
    if (!replace_first(w, table.half_pieces, table.half_repl, true)) break;
    while (replace_first(w, table.pieces, table.replacements, false)) {}
  }
  return w;
}

inline bool dehn_trivial(std::vector<int> w, const DehnTable& table) {
  free_reduce(w);
  while (true) {
    if (w.empty()) return true;
    if (!replace_first(w, table.pieces, table.replacements, false)) return false;
  }
}

inline PointedBall surface_ball(int genus, int radius) {
  if (radius > 4)
    throw std::invalid_argument("surface cayley balls are supported to radius 4");
  DehnTable table(genus);
  int letters = 4 * genus;

  struct Key {
    std::string s;
    bool operator==(const Key& o) const { return s == o.s; }
  };
  auto encode = [](const std::vector<int>& w) {
    std::string s;
    for (int x : w) s.push_back(static_cast<char>('a' + x));
    return s;
  };

  std::vector<std::vector<int>> words{{}};
  std::unordered_map<std::string, Vertex> by_form{{encode({}), 0}};
  std::vector<std::vector<Vertex>> spheres{{0}};
  Graph g(1);

  for (int r = 1; r <= radius; ++r) {
    std::vector<Vertex> sphere;
    for (Vertex v : spheres[r - 1]) {
      for (int x = 0; x < letters; ++x) {
        std::vector<int> w = words[v];
        w.push_back(x);
        w = dehn_reduce(std::move(w), table);
        int len = static_cast<int>(w.size());
        if (len < r - 2) throw std::logic_error("dehn reduction shortened below parent");
        Vertex target = -1;
        auto formed = encode(w);
        auto hit = by_form.find(formed);
        if (hit != by_form.end()) {
          target = hit->second;
        } else if (len == r) {
          // Equality scan within the sphere under construction.
          for (Vertex cand : sphere) {
            std::vector<int> test = w;
            auto inv = DehnTable::invert(words[cand]);
            test.insert(test.end(), inv.begin(), inv.end());
            if (dehn_trivial(std::move(test), table)) {
              target = cand;
              break;
            }
          }
          if (target == -1) {
            target = g.add_vertex();
            words.push_back(w);
            sphere.push_back(target);
          }
          by_form[formed] = target;
        } else if (len == r - 1 || len == r - 2) {
          // Must be an existing vertex one or two levels up.
          for (Vertex cand : spheres[len]) {
            std::vector<int> test = w;
            auto inv = DehnTable::invert(words[cand]);
            test.insert(test.end(), inv.begin(), inv.end());
            if (dehn_trivial(std::move(test), table)) {
              target = cand;
              break;
            }
          }
          if (target == -1) throw std::logic_error("dehn ball: lost vertex");
          by_form[formed] = target;
        } else {
          continue;  // reduced form still longer than r: cannot happen
        }
        if (target != v) g.add_edge(v, target);
      }
    }
    spheres.push_back(std::move(sphere));
  }
  PointedBall b;
  b.graph = std::move(g);
  b.center = 0;
  b.radius = radius;
  return b;
}

}  // namespace spaces_detail

inline PointedBall generate_ball(const SpaceGenerator& gen, int radius) {
  if (radius < 0) throw std::invalid_argument("generate_ball: negative radius");
  if (auto* t = std::get_if<TreeKind>(&gen.kind)) return spaces_detail::tree_ball(t->valence, radius);
  if (std::get_if<GridKind>(&gen.kind)) return spaces_detail::grid_ball(radius);
  if (auto* t = std::get_if<TilingKind>(&gen.kind)) return spaces_detail::tiling_ball(t->p, t->q, radius);
  if (auto* s = std::get_if<SurfaceKind>(&gen.kind)) return spaces_detail::surface_ball(s->genus, radius);
  throw std::invalid_argument("generate_ball: unsupported generator");
}

// ---------------------------------------------------------------------------
// Axes: periodic edge-paths inside a generated ball, with measured
// quasi-convexity over the truncation.
// ---------------------------------------------------------------------------

struct Axis {
  PointedBall ball;          // ambient truncation
  std::vector<Vertex> trace; // consecutive vertices adjacent
  int window = 0;
  Rat lambda0 = 0;           // measured quasi-convexity
  Rat max_stretch = 1;       // max |i-j| / d(v_i, v_j) over trace pairs

  VertexSet vertex_set() const {
    VertexSet s(trace.begin(), trace.end());
    normalize_set(s);
    return s;
  }
};

namespace spaces_detail {

// Max over trace pairs of the distance from any shortest-path-DAG vertex to
// the trace; every DAG vertex lies on some geodesic between the pair.
inline void measure_axis(Axis& axis) {
  const Graph& g = axis.ball.graph;
  DistanceField to_axis(g, axis.vertex_set());
  std::vector<DistanceField> from;
  from.reserve(axis.trace.size());
  for (Vertex v : axis.trace) from.emplace_back(g, v);

  Rat lambda = 0, stretch = 1;
  for (std::size_t i = 0; i < axis.trace.size(); ++i) {
    for (std::size_t j = i + 1; j < axis.trace.size(); ++j) {
      int dij = from[i].at(axis.trace[j]);
      if (dij > 0) stretch = rat_max(stretch, Rat(static_cast<long>(j - i), dij));
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        if (!from[i].reachable(v) || !from[j].reachable(v)) continue;
        if (from[i].at(v) + from[j].at(v) != dij) continue;
        lambda = rat_max(lambda, Rat(to_axis.at(v)));
      }
    }
  }
  axis.lambda0 = lambda;
  axis.max_stretch = stretch;
}

}  // namespace spaces_detail

// Axis words: trees take a generator index ("0"); the grid takes steps over
// x/y/X/Y ("xy" is the diagonal); tilings take a turn sequence ("12" is the
// alternating left/right line).
inline Axis axis_in(const SpaceGenerator& gen, const std::string& word, int window,
                    int ball_radius = -1, bool measure = true) {
  if (window < 1) throw std::invalid_argument("axis window must be >= 1");
  Axis axis;
  axis.window = window;

  if (auto* t = std::get_if<TreeKind>(&gen.kind)) {
    int dir = word.empty() ? 0 : std::stoi(word);
    if (dir < 0 || 2 * dir + 1 >= t->valence)
      throw std::invalid_argument("tree axis word must name a generator index");
    int radius = ball_radius > 0 ? ball_radius : window + 2;
    if (radius < window) throw std::invalid_argument("axis window exceeds ball radius");
    axis.ball = generate_ball(gen, radius);
    const Graph& g = axis.ball.graph;
    std::vector<Vertex> fwd{axis.ball.center}, bwd;
    // Forward along neighbour 2*dir, backward along neighbour 2*dir+1; then
    // always continue through the smallest-id unvisited child.
    auto extend = [&](Vertex first, std::vector<Vertex>& out) {
      Vertex prev = axis.ball.center, cur = first;
      out.push_back(cur);
      for (int s = 1; s < window; ++s) {
        Vertex next = -1;
        for (Vertex u : g.neighbors(cur))
          if (u != prev) { next = u; break; }
        if (next == -1) break;
        prev = cur;
        cur = next;
        out.push_back(cur);
      }
    };
    extend(g.neighbors(axis.ball.center)[2 * dir], fwd);
    extend(g.neighbors(axis.ball.center)[2 * dir + 1], bwd);
    axis.trace.assign(bwd.rbegin(), bwd.rend());
    axis.trace.insert(axis.trace.end(), fwd.begin(), fwd.end());
  } else if (std::get_if<GridKind>(&gen.kind)) {
    int radius = ball_radius > 0 ? ball_radius : window + 2;
    axis.ball = generate_ball(gen, radius);
    std::map<std::pair<int, int>, Vertex> coord;
    {
      // Recover coordinates by BFS signature: canonical ids were assigned by
      // (|x|+|y|, x, y); rebuild the same ordering.
      std::vector<std::pair<int, int>> pts;
      for (int x = -radius; x <= radius; ++x)
        for (int y = -(radius - std::abs(x)); y <= radius - std::abs(x); ++y)
          pts.emplace_back(x, y);
      std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) {
        int ra = std::abs(a.first) + std::abs(a.second);
        int rb = std::abs(b.first) + std::abs(b.second);
        return std::tie(ra, a.first, a.second) < std::tie(rb, b.first, b.second);
      });
      for (std::size_t i = 0; i < pts.size(); ++i) coord[pts[i]] = static_cast<Vertex>(i);
    }
    auto step_of = [](char c) -> std::pair<int, int> {
      switch (c) {
        case 'x': return {1, 0};
        case 'X': return {-1, 0};
        case 'y': return {0, 1};
        case 'Y': return {0, -1};
        default: throw std::invalid_argument("grid axis word uses x/X/y/Y");
      }
    };
    if (word.empty()) throw std::invalid_argument("grid axis word is empty");
    std::deque<std::pair<int, int>> path{{0, 0}};
    int fx = 0, fy = 0, bx = 0, by = 0;
    std::size_t fi = 0, bi = word.size();
    for (int s = 0; s < window; ++s) {
      auto [dx, dy] = step_of(word[fi % word.size()]);
      ++fi;
      fx += dx;
      fy += dy;
      if (std::abs(fx) + std::abs(fy) > radius) break;
      path.emplace_back(fx, fy);
    }
    for (int s = 0; s < window; ++s) {
      bi = (bi == 0 ? word.size() : bi) - 1;
      auto [dx, dy] = step_of(word[bi % word.size()]);
      bx -= dx;
      by -= dy;
      if (std::abs(bx) + std::abs(by) > radius) break;
      path.emplace_front(bx, by);
    }
    for (auto& pt : path) axis.trace.push_back(coord.at(pt));
  } else if (auto* t = std::get_if<TilingKind>(&gen.kind)) {
    int radius = ball_radius > 0 ? ball_radius : window + 4;
    spaces_detail::TilingGrower grower(t->p, t->q);
    grower.grow_ball(radius);
    Graph full = grower.to_graph();
    std::vector<int> turns;
    for (char c : word) {
      int turn = c - '0';
      if (turn < 1 || turn >= t->q) throw std::invalid_argument("tiling axis turn out of range");
      turns.push_back(turn);
    }
    if (turns.empty()) throw std::invalid_argument("tiling axis word is empty");
    auto step = [&](Vertex from, Vertex at, int turn) -> Vertex {
      const auto& rot = grower.rotation(at);
      int idx = -1;
      for (std::size_t i = 0; i < rot.size(); ++i)
        if (rot[i] == from) idx = static_cast<int>(i);
      if (idx < 0 || !grower.complete(at)) return -1;
      return rot[(idx + turn) % rot.size()];
    };
    std::deque<Vertex> path;
    {
      Vertex v0 = 0, v1 = grower.rotation(0)[0];
      path = {v0, v1};
      // Forward: consume turns at v1, v2, ...
      Vertex prev = v0, cur = v1;
      std::size_t wi = 0;
      for (int s = 0; s < window; ++s) {
        Vertex nxt = step(prev, cur, turns[wi % turns.size()]);
        ++wi;
        if (nxt < 0) break;
        path.push_back(nxt);
        prev = cur;
        cur = nxt;
      }
      // Backward from v0: reversed word with mirrored turns.
      prev = v1;
      cur = v0;
      std::size_t bi = turns.size();
      for (int s = 0; s + 1 < window; ++s) {
        bi = (bi == 0 ? turns.size() : bi) - 1;
        Vertex nxt = step(prev, cur, t->q - (turns[bi] % t->q));
        if (nxt < 0) break;
        path.push_front(nxt);
        prev = cur;
        cur = nxt;
      }
    }
    // Restrict to the ball and re-index.
    PointedBall ball = ball_around(full, 0, radius);
    DistanceField dist(full, 0);
    std::vector<Vertex> old_ids;
    {
      VertexSet keep;
      for (Vertex v = 0; v < full.num_vertices(); ++v)
        if (dist.reachable(v) && dist.at(v) <= radius) keep.push_back(v);
      old_ids = keep;
    }
    auto reindex = [&](Vertex old) -> Vertex {
      auto it = std::lower_bound(old_ids.begin(), old_ids.end(), old);
      if (it == old_ids.end() || *it != old) return -1;
      return static_cast<Vertex>(it - old_ids.begin());
    };
    axis.ball = std::move(ball);
    for (Vertex old : path) {
      Vertex v = reindex(old);
      if (v >= 0 && dist.at(old) <= radius - 1)
        axis.trace.push_back(v);
      else if (!axis.trace.empty())
        break;
    }
    if (axis.trace.size() < 3) throw std::invalid_argument("tiling axis left the truncation");
  } else {
    throw std::invalid_argument("axis_in: unsupported generator for axes");
  }

  // Validate the trace is an edge-path.
  for (std::size_t i = 0; i + 1 < axis.trace.size(); ++i)
    if (!axis.ball.graph.has_edge(axis.trace[i], axis.trace[i + 1]))
      throw std::logic_error("axis trace is not an edge-path");
  if (measure) spaces_detail::measure_axis(axis);
  return axis;
}

// ---------------------------------------------------------------------------
// Translate families
// ---------------------------------------------------------------------------

struct TranslateFamily {
  const Graph* graph = nullptr;
  std::vector<VertexSet> members;
  std::vector<std::vector<int>> pairwise;  // min distances, -1 unreachable

  void compute_pairwise() {
    std::size_t n = members.size();
    pairwise.assign(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
      DistanceField d(*graph, members[i]);
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        int best = -1;
        for (Vertex v : members[j]) {
          if (!d.reachable(v)) continue;
          if (best == -1 || d.at(v) < best) best = d.at(v);
        }
        pairwise[i][j] = best;
      }
    }
  }
};

inline Report separation_audit(const TranslateFamily& family, int sigma) {
  if (family.members.size() < 2)
    throw std::invalid_argument("separation_audit needs at least two members");
  Report rep("separation-audit", Verdict::Pass);
  int best = -1;
  std::pair<int, int> argbest{-1, -1};
  for (std::size_t i = 0; i < family.members.size(); ++i)
    for (std::size_t j = i + 1; j < family.members.size(); ++j) {
      int d = family.pairwise[i][j];
      if (d >= 0 && (best == -1 || d < best)) {
        best = d;
        argbest = {static_cast<int>(i), static_cast<int>(j)};
      }
    }
  rep.details["sigma"] = sigma;
  rep.details["min_distance"] = best;
  rep.details["witness_pair"] = {argbest.first, argbest.second};
  rep.verdict = (best >= sigma) ? Verdict::Pass : Verdict::Fail;
  return rep;
}

}  // namespace drill

#endif  // DRILL_SPACES_HPP_
