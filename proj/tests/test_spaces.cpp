#include <catch2/catch_amalgamated.hpp>

#include "drill/spaces.hpp"
#include "oracles.hpp"

using namespace drill;

TEST_CASE("tree ball counts") {
  auto b = generate_ball(SpaceGenerator::tree(4), 3);
  CHECK(b.graph.num_vertices() == 53);  // 1 + 4 + 12 + 36
  b.validate();
  // Trees are acyclic: |E| = |V| - 1.
  CHECK(b.graph.num_edges() == 52);
}

TEST_CASE("grid ball is the L1 diamond") {
  auto b = generate_ball(SpaceGenerator::grid(), 2);
  CHECK(b.graph.num_vertices() == 13);
  b.validate();
  auto b6 = generate_ball(SpaceGenerator::grid(), 6);
  CHECK(b6.graph.num_vertices() == 2 * 6 * 7 + 1);
}

TEST_CASE("euclidean tilings cross-check the grower") {
  // {4,4} is the square grid.
  for (int r = 1; r <= 5; ++r) {
    auto t = generate_ball(SpaceGenerator::tiling(4, 4), r);
    auto g = generate_ball(SpaceGenerator::grid(), r);
    CHECK(t.graph.num_vertices() == g.graph.num_vertices());
    CHECK(t.graph.num_edges() == g.graph.num_edges());
  }
  // {3,6}: triangular lattice, |B_r| = 1 + 3r(r+1).
  for (int r = 1; r <= 5; ++r) {
    auto t = generate_ball(SpaceGenerator::tiling(3, 6), r);
    CHECK(t.graph.num_vertices() == 1 + 3 * r * (r + 1));
  }
}

TEST_CASE("hyperbolic tiling balls match the hyperboloid oracle") {
  for (auto [p, q] : {std::pair{7, 3}, {5, 4}}) {
    int radius = (p == 7) ? 5 : 4;
    auto oracle = oracles::tiling_sphere_sizes(p, q, radius);
    auto ball = generate_ball(SpaceGenerator::tiling(p, q), radius);
    DistanceField d(ball.graph, ball.center);
    std::vector<int> sphere(radius + 1, 0);
    for (Vertex v = 0; v < ball.graph.num_vertices(); ++v) sphere[d.at(v)]++;
    INFO("tiling {" << p << "," << q << "}");
    CHECK(sphere == oracle);
  }
}

TEST_CASE("small hyperbolic tiling balls are pointed-isomorphic to the oracle") {
  auto mine = generate_ball(SpaceGenerator::tiling(7, 3), 3);
  auto ref = oracles::tiling_ball_oracle(7, 3, 3);
  CHECK(pointed_isomorphic(mine, ref).has_value());
}

TEST_CASE("tiling interior degrees and face girth") {
  auto ball = generate_ball(SpaceGenerator::tiling(7, 3), 5);
  DistanceField d(ball.graph, ball.center);
  for (Vertex v = 0; v < ball.graph.num_vertices(); ++v)
    if (d.at(v) <= 3) CHECK(ball.graph.degree(v) == 3);
  // Girth equals p: no cycle shorter than 7 through the centre region.
  // BFS-based girth through each interior vertex.
  int best = 1 << 20;
  for (Vertex v = 0; v < ball.graph.num_vertices(); ++v) {
    if (d.at(v) > 2) continue;
    // shortest cycle through v: BFS tracking parent
    std::vector<int> dist(ball.graph.num_vertices(), -1), parent(ball.graph.num_vertices(), -1);
    std::deque<Vertex> queue{v};
    dist[v] = 0;
    while (!queue.empty()) {
      Vertex u = queue.front();
      queue.pop_front();
      for (Vertex w : ball.graph.neighbors(u)) {
        if (dist[w] == -1) {
          dist[w] = dist[u] + 1;
          parent[w] = u;
          queue.push_back(w);
        } else if (w != parent[u] && parent[w] != u) {
          best = std::min(best, dist[u] + dist[w] + 1);
        }
      }
    }
  }
  CHECK(best == 7);
}

TEST_CASE("generator coherence: smaller radius is a restriction") {
  for (auto gen : {SpaceGenerator::tiling(7, 3), SpaceGenerator::tree(3), SpaceGenerator::grid()}) {
    auto big = generate_ball(gen, 4);
    auto small = generate_ball(gen, 3);
    auto restricted = ball_around(big.graph, big.center, 3);
    REQUIRE(restricted.graph.num_vertices() == small.graph.num_vertices());
    CHECK(restricted.graph.edges() == small.graph.edges());
    CHECK(restricted.center == small.center);
  }
}

TEST_CASE("surface group ball via Dehn reduction") {
  auto b = generate_ball(SpaceGenerator::surface(2), 3);
  DistanceField d(b.graph, b.center);
  std::vector<int> sphere(4, 0);
  for (Vertex v = 0; v < b.graph.num_vertices(); ++v) sphere[d.at(v)]++;
  // Genus-2 surface group, standard presentation: 8-regular, girth 8.
  CHECK(sphere[0] == 1);
  CHECK(sphere[1] == 8);
  CHECK(sphere[2] == 8 * 7);
  for (Vertex v = 0; v < b.graph.num_vertices(); ++v)
    if (d.at(v) <= 2) CHECK(b.graph.degree(v) == 8);
  // No relation shorter than the defining one: girth 8 means spheres up to
  // radius 3 are tree-like.
  CHECK(sphere[3] == 8 * 7 * 7);
}

TEST_CASE("unsupported generators are rejected") {
  CHECK_THROWS_AS(SpaceGenerator::tiling(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(SpaceGenerator::surface(1), std::invalid_argument);
  CHECK_THROWS_AS(SpaceGenerator::parse("dodecahedral:1"), std::invalid_argument);
  CHECK(SpaceGenerator::parse("tiling:7,3").describe() == "tiling:7,3");
}

TEST_CASE("tree axis is a geodesic line") {
  Axis axis = axis_in(SpaceGenerator::tree(4), "0", 10);
  CHECK(axis.trace.size() == 21);
  CHECK(axis.lambda0 == 0);
  CHECK(axis.max_stretch == 1);
}

TEST_CASE("grid horizontal axis is geodesic with no wandering") {
  Axis axis = axis_in(SpaceGenerator::grid(), "x", 6);
  CHECK(axis.max_stretch == 1);
  // L1 geodesics between collinear horizontal points are horizontal.
  CHECK(axis.lambda0 == 0);
}

TEST_CASE("grid diagonal axis shows non-hyperbolic spread") {
  Axis a4 = axis_in(SpaceGenerator::grid(), "xy", 4);
  Axis a8 = axis_in(SpaceGenerator::grid(), "xy", 8);
  CHECK(a4.max_stretch == 1);  // staircases are L1 geodesics
  CHECK(a4.lambda0 >= 2);
  CHECK(a8.lambda0 > a4.lambda0);  // deviation grows with the window
}

TEST_CASE("tiling alternating axis is a uniform quasi-geodesic") {
  Axis axis = axis_in(SpaceGenerator::tiling(7, 3), "12", 8);
  CHECK(axis.trace.size() >= 13);
  CHECK(axis.lambda0 <= 2);
  CHECK(axis.max_stretch <= Rat(3, 2));
  Axis wider = axis_in(SpaceGenerator::tiling(7, 3), "12", 10);
  CHECK(wider.lambda0 <= 2);  // stable as the window grows
}

TEST_CASE("separation audit") {
  auto ball = generate_ball(SpaceGenerator::grid(), 8);
  // Two parallel horizontal lines y=0, y=5 restricted to |x| <= 2.
  std::vector<std::pair<int, int>> pts;
  for (int x = -8; x <= 8; ++x)
    for (int y = -(8 - std::abs(x)); y <= 8 - std::abs(x); ++y) pts.emplace_back(x, y);
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) {
    int ra = std::abs(a.first) + std::abs(a.second);
    int rb = std::abs(b.first) + std::abs(b.second);
    return std::tie(ra, a.first, a.second) < std::tie(rb, b.first, b.second);
  });
  VertexSet low, high;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i].first) <= 2 && pts[i].second == 0) low.push_back((Vertex)i);
    if (std::abs(pts[i].first) <= 2 && pts[i].second == 5) high.push_back((Vertex)i);
  }
  normalize_set(low);
  normalize_set(high);
  TranslateFamily fam;
  fam.graph = &ball.graph;
  fam.members = {low, high};
  fam.compute_pairwise();
  CHECK(separation_audit(fam, 5).verdict == Verdict::Pass);
  auto failed = separation_audit(fam, 6);
  CHECK(failed.verdict == Verdict::Fail);
  CHECK(failed.details["min_distance"] == 5);
}
