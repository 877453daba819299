// Test-only oracles, independent of the library's production code paths:
// Floyd-Warshall distances, seeded random graphs, a hyperboloid-model
// realization of {p,q} tilings, and a direct Gromov-product 4-point sweep.

#ifndef DRILL_TESTS_ORACLES_HPP_
#define DRILL_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "drill/graph.hpp"

namespace oracles {

constexpr int kInf = 1 << 28;

// O(n^3) all-pairs distances; deliberately not BFS.
inline std::vector<std::vector<int>> floyd_warshall(const drill::Graph& g) {
  int n = g.num_vertices();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (int v = 0; v < n; ++v) d[v][v] = 0;
  for (auto [u, v] : g.edges()) d[u][v] = d[v][u] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline drill::Graph random_connected_graph(int n, double extra_edge_prob, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  drill::Graph g(n);
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    g.add_edge(v, pick(rng));
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng) < extra_edge_prob) g.add_edge(u, v);
  return g;
}

inline drill::Graph random_tree(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  drill::Graph g(n);
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    g.add_edge(v, pick(rng));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Hyperboloid-model {p,q} oracle.  Vertices are generated as the orbit of
// the base point under rotations about a vertex and an adjacent face
// centre; edges connect points at the tiling's edge length.
// ---------------------------------------------------------------------------

struct Mat3 {
  double m[3][3];
  static Mat3 identity() {
    Mat3 r{};
    for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0;
    return r;
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
        r.m[i][j] = s;
      }
    return r;
  }
  std::array<double, 3> apply(const std::array<double, 3>& v) const {
    std::array<double, 3> r{};
    for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    return r;
  }
};

inline Mat3 rot_z(double theta) {
  Mat3 r = Mat3::identity();
  r.m[0][0] = std::cos(theta);
  r.m[0][1] = -std::sin(theta);
  r.m[1][0] = std::sin(theta);
  r.m[1][1] = std::cos(theta);
  return r;
}

inline Mat3 boost_x(double t) {  // translation along the x-axis
  Mat3 r = Mat3::identity();
  r.m[0][0] = std::cosh(t);
  r.m[0][2] = std::sinh(t);
  r.m[2][0] = std::sinh(t);
  r.m[2][2] = std::cosh(t);
  return r;
}

inline double lorentz(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] - a[2] * b[2];
}

// Ball of combinatorial radius `radius` around a vertex of {p,q}.
inline drill::PointedBall tiling_ball_oracle(int p, int q, int radius) {
  const double pi = std::acos(-1.0);
  double edge = 2.0 * std::acosh(std::cos(pi / p) / std::sin(pi / q));
  // Face centre to vertex (hypotenuse of the fundamental right triangle).
  double circ = std::acosh(1.0 / (std::tan(pi / p) * std::tan(pi / q)));

  // Face centre at angle pi/q from the first edge direction (x-axis).
  Mat3 to_face = rot_z(pi / q) * boost_x(circ) * rot_z(-pi / q);
  Mat3 inv_face = rot_z(pi / q) * boost_x(-circ) * rot_z(-pi / q);
  std::vector<Mat3> gens = {
      rot_z(2 * pi / q), rot_z(-2 * pi / q),
      to_face * rot_z(2 * pi / p) * inv_face,
      to_face * rot_z(-2 * pi / p) * inv_face,
  };

  std::array<double, 3> base{0.0, 0.0, 1.0};
  std::vector<std::array<double, 3>> pts{base};
  auto same_point = [&](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::abs(lorentz(a, b) + 1.0) < 1e-7 * std::max(1.0, a[2] * b[2] * 1e-3);
  };
  auto known = [&](const std::array<double, 3>& c) {
    for (auto& q2 : pts)
      if (same_point(c, q2)) return true;
    return false;
  };

  // Enough group words to exhaust the combinatorial ball with slack.
  double reach = (radius + 2) * edge + circ + 1.0;
  std::size_t head = 0;
  while (head < pts.size()) {
    auto pt = pts[head++];
    for (auto& gmat : gens) {
      auto cand = gmat.apply(pt);
      if (std::acosh(std::max(1.0, cand[2])) > reach) continue;
      if (!known(cand)) pts.push_back(cand);
    }
    if (pts.size() > 200000) throw std::runtime_error("tiling oracle: orbit exploded");
  }

  drill::Graph g(static_cast<int>(pts.size()));
  double cosh_edge = std::cosh(edge);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (std::abs(-lorentz(pts[i], pts[j]) - cosh_edge) < 1e-6 * cosh_edge)
        g.add_edge(static_cast<int>(i), static_cast<int>(j));

  return drill::ball_around(g, 0, radius);
}

// Sphere sizes 0..radius around the base vertex.
inline std::vector<int> tiling_sphere_sizes(int p, int q, int radius) {
  auto ball = tiling_ball_oracle(p, q, radius);
  drill::DistanceField d(ball.graph, ball.center);
  std::vector<int> counts(radius + 1, 0);
  for (int v = 0; v < ball.graph.num_vertices(); ++v)
    if (d.reachable(v) && d.at(v) <= radius) counts[d.at(v)]++;
  return counts;
}


// Relator-policy soundness oracle: a closed walk is certified trivial by
// splitting at repeated vertices down to embedded cycles, each of which must
// appear in the enumerated cycle set (or be a backtrack).
inline bool walk_certified_trivial(std::vector<drill::Vertex> walk,
                                   const std::set<std::vector<drill::Vertex>>& cycles) {
  if (walk.size() <= 2) return true;
  for (std::size_t i = 0; i + 2 < walk.size(); ++i)
    if (walk[i] == walk[i + 2]) {
      walk.erase(walk.begin() + i, walk.begin() + i + 2);
      return walk_certified_trivial(std::move(walk), cycles);
    }
  std::map<drill::Vertex, std::size_t> seen;
  for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
    auto it = seen.find(walk[i]);
    if (it != seen.end()) {
      std::vector<drill::Vertex> inner(walk.begin() + it->second, walk.begin() + i + 1);
      std::vector<drill::Vertex> outer(walk.begin(), walk.begin() + it->second + 1);
      outer.insert(outer.end(), walk.begin() + i + 1, walk.end());
      return walk_certified_trivial(std::move(inner), cycles) &&
             walk_certified_trivial(std::move(outer), cycles);
    }
    seen[walk[i]] = i;
  }
  walk.pop_back();
  auto least = std::min_element(walk.begin(), walk.end());
  std::rotate(walk.begin(), least, walk.end());
  if (walk.size() >= 2 && walk[1] > walk.back()) {
    std::reverse(walk.begin() + 1, walk.end());
  }
  return cycles.count(walk) > 0;
}

}  // namespace oracles

#endif  // DRILL_TESTS_ORACLES_HPP_
