#include <catch2/catch_amalgamated.hpp>

#include "drill/horoball.hpp"
#include "drill/spaces.hpp"
#include "oracles.hpp"

using namespace drill;

namespace {

Graph path_graph(int n) {
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph cycle_graph(int n) {
  Graph g = path_graph(n);
  g.add_edge(n - 1, 0);
  return g;
}

}  // namespace

TEST_CASE("horoball over a single edge") {
  Graph base(2);
  base.add_edge(0, 1);
  Horoball h = build_horoball(base, 1);
  CHECK(h.total.num_vertices() == 4);
  // 2 vertical edges, and one horizontal edge at each of the two depths.
  CHECK(h.total.num_edges() == 4);
  CHECK(h.total.label(h.vertex_at(0, 1)) == "horoball:1");
}

TEST_CASE("horoball distances: ends of a path") {
  // d_base = 8; a regular geodesic climbs 2, jumps twice at depth 2, descends.
  Graph base = path_graph(9);
  Horoball h = build_horoball(base, 3);
  DistanceField d(h.total, h.vertex_at(0, 0));
  CHECK(d.at(h.vertex_at(8, 0)) == 6);
}

TEST_CASE("short base distances are undistorted") {
  Graph base = path_graph(12);
  Horoball h = build_horoball(base, 6);
  DistanceField d0(h.total, h.vertex_at(0, 0));
  for (int w = 1; w < 6; ++w) CHECK(d0.at(h.vertex_at(w, 0)) == w);
  // At distance >= 6 the horoball is strictly shorter.
  CHECK(d0.at(h.vertex_at(8, 0)) < 8);
}

TEST_CASE("distortion audit passes on sufficiently deep horoballs") {
  for (int n : {20, 40}) {
    Graph base = path_graph(n);
    Horoball h = build_horoball(base, 9);
    auto rep = distortion_audit(h);
    INFO("path of " << n);
    CHECK(rep.verdict == Verdict::Pass);
  }
  Graph c = cycle_graph(24);
  CHECK(distortion_audit(build_horoball(c, 9)).verdict == Verdict::Pass);
}

TEST_CASE("distortion audit is inconclusive when truncated") {
  Graph base = path_graph(40);
  Horoball h = build_horoball(base, 1);
  auto rep = distortion_audit(h);
  CHECK(rep.verdict == Verdict::Inconclusive);
}

TEST_CASE("horoball distance monotone in depth and stabilizing") {
  Graph base = path_graph(21);  // ends at base distance 20
  int prev = 1 << 20;
  std::vector<int> at_depth;
  for (int depth = 0; depth <= 8; ++depth) {
    Horoball h = build_horoball(base, depth);
    DistanceField d(h.total, h.vertex_at(0, 0));
    int dist = d.at(h.vertex_at(20, 0));
    CHECK(dist <= prev);
    prev = dist;
    at_depth.push_back(dist);
  }
  // Stabilized once depth >= log2(20) + 2 ~ 7.
  CHECK(at_depth[7] == at_depth[8]);
}

TEST_CASE("pushing paths to depth zero obeys the exponential law") {
  Graph base = cycle_graph(20);
  Horoball h = build_horoball(base, 7);
  for (int v : {3, 9, 14}) {
    DistanceField d(h.total, h.vertex_at(0, 0));
    int dH = d.at(h.vertex_at(v, 0));
    DistanceField db(base, 0);
    Int lhs = Int(db.at(v)) * db.at(v);
    CHECK(lhs <= Int(4) << dH);  // d_base^2 <= 4 * 2^dH
  }
}

TEST_CASE("horoball csc audit: cycles die at depth") {
  Graph c12 = cycle_graph(12);
  auto deep = horoball_csc_audit(build_horoball(c12, 4), 5);
  CHECK(deep.verdict == Verdict::Pass);
  // Too shallow: the 12-cycle survives as a Z class.
  auto shallow = horoball_csc_audit(build_horoball(c12, 1), 5);
  CHECK(shallow.verdict == Verdict::Fail);
}

TEST_CASE("horoball csc audit on tree and point bases") {
  auto tree = generate_ball(SpaceGenerator::tree(3), 3);
  CHECK(horoball_csc_audit(build_horoball(tree.graph, 3), 5).verdict == Verdict::Pass);
  Graph point(1);
  Horoball h = build_horoball(point, 5);
  CHECK(h.total.num_edges() == 5);  // a path
  CHECK(horoball_csc_audit(h, 5).verdict == Verdict::Pass);
}

TEST_CASE("horoball delta is uniformly small across bases and depths") {
  // Empirical stability: one measured constant bounds the exact 4-point
  // delta of truncated horoballs over all four base families.
  Rat bound(4);
  std::vector<Graph> bases;
  bases.push_back(path_graph(20));
  bases.push_back(cycle_graph(20));
  bases.push_back(generate_ball(SpaceGenerator::tree(3), 3).graph);
  bases.push_back(generate_ball(SpaceGenerator::tiling(7, 3), 2).graph);
  for (const auto& base : bases) {
    Rat prev = -1;
    for (int depth : {4, 5, 6}) {
      Horoball h = build_horoball(base, depth);
      Rat delta = four_point_delta(h.total, DeltaPolicy::exact_policy()).delta;
      CHECK(delta <= bound);
      if (prev >= 0) CHECK(delta <= prev);  // non-increasing beyond depth 4
      prev = delta;
    }
  }
}

TEST_CASE("bounded-valence horoball over a path") {
  Graph base = path_graph(20);
  BVHoroball bv = build_bv_horoball(base, 4, 12345);
  CHECK(bv.audit.verdict == Verdict::Pass);
  CHECK(bv.audit.details["phi_lipschitz"].get<int>() <= 2);
  CHECK(bv.audit.details["psi_lipschitz"].get<int>() <= 6);
  CHECK(bv.audit.details["phi_psi_displacement"].get<int>() <= 1);
  CHECK(bv.nets[0].size() == 20);
  // Nets thin out with depth.
  CHECK(bv.nets[4].size() < bv.nets[1].size());
  // Reproducible given the seed.
  BVHoroball again = build_bv_horoball(base, 4, 12345);
  CHECK(again.total.edges() == bv.total.edges());
}

TEST_CASE("bounded-valence horoball over a single vertex is a path") {
  Graph point(1);
  BVHoroball bv = build_bv_horoball(point, 4, 7);
  CHECK(bv.total.num_vertices() == 5);
  CHECK(bv.total.num_edges() == 4);
  CHECK(bv.audit.verdict == Verdict::Pass);
}

TEST_CASE("bounded-valence horoball stays bounded while the full one grows") {
  Graph base(40);
  for (int i = 0; i + 1 < 40; ++i) base.add_edge(i, i + 1);
  BVHoroball bv = build_bv_horoball(base, 5, 99);
  Horoball full = build_horoball(base, 5);
  int full_max = 0;
  for (Vertex v = 0; v < full.total.num_vertices(); ++v)
    full_max = std::max(full_max, full.total.degree(v));
  CHECK(bv.audit.details["max_valence"].get<int>() < full_max);
  CHECK(bv.audit.verdict == Verdict::Pass);
  // Dense little bases still satisfy every audit clause.
  auto ball = generate_ball(SpaceGenerator::tiling(7, 3), 3);
  CHECK(build_bv_horoball(ball.graph, 5, 99).audit.verdict == Verdict::Pass);
}
