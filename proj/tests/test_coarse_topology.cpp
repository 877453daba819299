#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "drill/coarse_topology.hpp"
#include "drill/spaces.hpp"
#include "oracles.hpp"

using namespace drill;

namespace {

Graph cycle_graph(int n) {
  Graph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

// Two vertices joined by three arcs of length `len`.
Graph theta_graph(int len) {
  Graph g(2);
  for (int arc = 0; arc < 3; ++arc) {
    Vertex prev = 0;
    for (int i = 1; i < len; ++i) {
      Vertex v = g.add_vertex();
      g.add_edge(prev, v);
      prev = v;
    }
    g.add_edge(prev, 1);
  }
  return g;
}

Graph cylinder_graph(int circumference, int height) {
  Graph g(circumference * height);
  auto id = [&](int i, int j) { return j * circumference + i; };
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < circumference; ++i) {
      g.add_edge(id(i, j), id((i + 1) % circumference, j));
      if (j + 1 < height) g.add_edge(id(i, j), id(i, j + 1));
    }
  return g;
}


}  // namespace

TEST_CASE("embedded cycle enumeration on small graphs") {
  Graph c6 = cycle_graph(6);
  CHECK(embedded_cycles(c6, 5).empty());
  CHECK(embedded_cycles(c6, 6).size() == 1);
  Graph k4(4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) k4.add_edge(i, j);
  CHECK(embedded_cycles(k4, 3).size() == 4);
  CHECK(embedded_cycles(k4, 4).size() == 7);  // 4 triangles + 3 squares
}

TEST_CASE("pi1D presentation of cycles") {
  Graph c10 = cycle_graph(10);
  auto p5 = pi1D_presentation(c10, 5, 0);
  CHECK(p5.num_generators == 1);
  CHECK(p5.relators.empty());
  auto p10 = pi1D_presentation(c10, 10, 0);
  CHECK(p10.num_generators == 1);
  REQUIRE(p10.relators.size() == 1);
  CHECK(p10.relators[0].size() == 1);
}

TEST_CASE("classification of cycle presentations") {
  Graph c10 = cycle_graph(10);
  auto free1 = classify_small(pi1D_presentation(c10, 5, 0));
  CHECK(free1.kind == GroupVerdict::Kind::InfiniteCyclic);
  CHECK(free1.abelian_free_rank == 1);
  REQUIRE(free1.z_map.size() == 1);
  CHECK((free1.z_map[0] == 1 || free1.z_map[0] == -1));
  auto killed = classify_small(pi1D_presentation(c10, 10, 0));
  CHECK(killed.kind == GroupVerdict::Kind::Trivial);
  CHECK(!killed.tietze_log.empty());
}

TEST_CASE("theta graph presentations across scales") {
  Graph theta = theta_graph(3);
  auto v6 = classify_small(pi1D_presentation(theta, 6, 0));
  CHECK(v6.kind == GroupVerdict::Kind::Trivial);
  auto v5 = classify_small(pi1D_presentation(theta, 5, 0));
  CHECK(v5.kind == GroupVerdict::Kind::Rank2SingleRelator);
  CHECK(v5.abelian_free_rank == 2);
  CHECK(v5.final_relators.empty());
  CHECK(v5.abelian_torsion.empty());
}

TEST_CASE("csc_check dichotomies") {
  auto tree = generate_ball(SpaceGenerator::tree(3), 4);
  for (int D : {1, 4, 9}) CHECK(csc_check(tree.graph, D).verdict == Verdict::Pass);
  Graph c10 = cycle_graph(10);
  CHECK(csc_check(c10, 9).verdict == Verdict::Fail);
  CHECK(csc_check(c10, 10).verdict == Verdict::Pass);
  CHECK(csc_check(c10, 10, 0, true).verdict == Verdict::Pass);  // 2D cross-check
}

TEST_CASE("csc_check on a tiling ball at the face scale") {
  auto ball = generate_ball(SpaceGenerator::tiling(7, 3), 6);
  auto rep = csc_check(ball.graph, 7);
  CHECK(rep.verdict == Verdict::Pass);
  auto below = csc_check(ball.graph, 6);
  CHECK(below.verdict == Verdict::Fail);
}

TEST_CASE("relator policy soundness: closed walks decompose into relator cycles") {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    Graph g = oracles::random_connected_graph(18, 0.12, seed);
    int D = 6;
    auto cycles = embedded_cycles(g, D);
    std::set<std::vector<Vertex>> cycle_set(cycles.begin(), cycles.end());
    std::uint64_t count = 0;
    bool all_ok = true;
    std::function<void(std::vector<Vertex>&)> dfs = [&](std::vector<Vertex>& walk) {
      if (walk.size() >= 3 && walk.back() == walk.front()) {
        ++count;
        all_ok = all_ok && oracles::walk_certified_trivial(walk, cycle_set);
      }
      if (walk.size() == static_cast<std::size_t>(D) + 1) return;
      for (Vertex u : g.neighbors(walk.back())) {
        walk.push_back(u);
        dfs(walk);
        walk.pop_back();
      }
    };
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      std::vector<Vertex> walk{v};
      dfs(walk);
    }
    CHECK(count > 0);
    CHECK(all_ok);
  }
}

TEST_CASE("z-cover of the 10-cycle is a line segment") {
  Graph c10 = cycle_graph(10);
  auto cov = z_cover(c10, 5, {1}, 2, 0);
  CHECK(cov.total.num_vertices() == 50);
  CHECK(cov.total.num_edges() == 49);
  int deg1 = 0;
  for (Vertex v = 0; v < 50; ++v) {
    int d = cov.total.degree(v);
    CHECK(d <= 2);
    if (d == 1) ++deg1;
  }
  CHECK(deg1 == 2);
  CHECK(is_connected(cov.total));
  Vertex from = cov.cover_vertex(3, 0), to = cov.deck(from);
  REQUIRE(to != -1);
  DistanceField d(cov.total, from);
  CHECK(d.at(to) == 10);
  for (auto [u, v] : cov.total.edges()) {
    Vertex bu = cov.base_of[u], bv = cov.base_of[v];
    CHECK((bu == bv || c10.has_edge(bu, bv)));
  }
}

TEST_CASE("z-cover rejects degenerate homomorphisms") {
  Graph c10 = cycle_graph(10);
  CHECK_THROWS_AS(z_cover(c10, 5, {0}, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(z_cover(c10, 5, {2}, 2, 0), std::invalid_argument);
  CHECK_THROWS_AS(z_cover(c10, 10, {1}, 2, 0), std::invalid_argument);
}

TEST_CASE("z-cover lift audit on the 10-cycle and the cylinder") {
  Graph c10 = cycle_graph(10);
  auto cov = z_cover(c10, 5, {1}, 2, 0);
  auto rep = zcover_lift_audit(c10, cov);
  CHECK(rep.verdict == Verdict::Pass);
  CHECK(rep.details["interior_bases"].get<int>() > 0);

  Graph cyl = cylinder_graph(10, 4);
  auto verdict = classify_small(pi1D_presentation(cyl, 5, 0));
  REQUIRE(verdict.kind == GroupVerdict::Kind::InfiniteCyclic);
  std::vector<long> hom;
  for (const auto& z : verdict.z_map) hom.push_back(z.convert_to<long>());
  auto cov2 = z_cover(cyl, 5, hom, 3, 0);
  CHECK(is_connected(cov2.total));
  CHECK(zcover_lift_audit(cyl, cov2).verdict == Verdict::Pass);
  for (auto [u, v] : cov2.total.edges()) {
    Vertex du = cov2.deck(u), dv = cov2.deck(v);
    if (du != -1 && dv != -1) CHECK(cov2.total.has_edge(du, dv));
  }
}

TEST_CASE("project_retraction on a tree line") {
  Axis axis = axis_in(SpaceGenerator::tree(4), "0", 5);
  const Graph& g = axis.ball.graph;
  auto r = project_retraction(g, axis.vertex_set(), 2, 0, 0);
  CHECK(r.q_constant == 1);
  DistanceField d(g, axis.vertex_set());
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    CHECK(d.at(r.stable(v)) <= 2);
    if (d.at(v) <= 2) CHECK(r.stable(v) == v);
    if (d.at(v) == 2) CHECK(r.apply(v, 3) == v);
  }
  CHECK(r.stable_q_in_target_metric);
}

TEST_CASE("project_retraction on a tiling axis neighbourhood") {
  Axis axis = axis_in(SpaceGenerator::tiling(7, 3), "12", 6, 9);
  const Graph& g = axis.ball.graph;
  Rat delta = measured_delta_ball(g, axis.ball.center, 4);
  int K = 4 + static_cast<int>(ceil_rat(4 * delta + axis.lambda0).convert_to<long>());
  auto r = project_retraction(g, axis.vertex_set(), K, delta, axis.lambda0);
  CHECK(r.q_constant == 2 * delta + 1);
  for (Vertex v : r.target) CHECK(r.stable(v) == v);
}

TEST_CASE("retraction pi1 transfer on the cylinder") {
  Graph cyl = cylinder_graph(10, 4);
  VertexSet core;
  for (int i = 0; i < 10; ++i) core.push_back(i);
  auto r = project_retraction(cyl, core, 0, 0, 0);
  CHECK(r.q_constant == 1);

  std::vector<Vertex> winding;
  for (int i = 0; i < 10; ++i) winding.push_back(30 + i);
  std::vector<Vertex> constant{35, 35, 35};
  std::vector<Vertex> inside;
  for (int i = 0; i < 10; ++i) inside.push_back(i);

  auto rep = retraction_pi1_transfer(r, 5, {winding, constant, inside});
  REQUIRE(rep.verdict == Verdict::Pass);
  auto& transferred = rep.details["transferred"];
  long w0 = transferred[0]["z_class"].get<long>();
  long w1 = transferred[1]["z_class"].get<long>();
  long w2 = transferred[2]["z_class"].get<long>();
  CHECK((w0 == 1 || w0 == -1));
  CHECK(w1 == 0);
  CHECK(w0 == w2);
  auto img = transferred[2]["loop"];
  std::vector<Vertex> got;
  for (auto& x : img) got.push_back(x.get<int>());
  VertexSet gs(got.begin(), got.end());
  normalize_set(gs);
  VertexSet core_sorted = core;
  normalize_set(core_sorted);
  CHECK(gs == core_sorted);
}

TEST_CASE("retraction pi1 transfer hypothesis failures are named") {
  Graph cyl = cylinder_graph(10, 4);
  VertexSet core;
  for (int i = 0; i < 10; ++i) core.push_back(i);
  auto r = project_retraction(cyl, core, 0, 0, 0);
  auto rep = retraction_pi1_transfer(r, 4);  // D = 4 is not > 2Q+2 = 4
  CHECK(rep.verdict == Verdict::Inconclusive);
  CHECK(rep.details["failed_hypothesis"] == "D > 2Q+2");
}

TEST_CASE("presentation json shape") {
  Graph c6 = cycle_graph(6);
  auto pres = pi1D_presentation(c6, 6, 0);
  auto j = pres.to_json();
  CHECK(j["generators"] == 1);
  CHECK(j["relators"].size() == 1);
}
