// Shells and tubes around a subset: completed shells (arcs realizing short
// ambient distances), completed tube complements, projections from far
// spheres, the distance-comparison function Phi, tube comparability, and
// projections of boundary-sample paths.

#ifndef DRILL_SHELLS_HPP_
#define DRILL_SHELLS_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drill/coarse_topology.hpp"
#include "drill/graph.hpp"
#include "drill/hyperbolicity.hpp"
#include "drill/numeric.hpp"
#include "drill/report.hpp"

namespace drill {

// ---------------------------------------------------------------------------
// Completed shells and completed tube complements
// ---------------------------------------------------------------------------

struct CompletedShell {
  Graph graph;                      // shell vertices then fresh arc vertices
  VertexSet shell_ambient;          // ambient ids of shell vertices, sorted
  std::vector<Vertex> to_ambient;   // graph vertex -> ambient id (-1 for arcs)
  int K = 0;
  int scale_s = 0;
  int components = 1;

  Vertex cs_of_ambient(Vertex ambient) const {
    auto it = std::lower_bound(shell_ambient.begin(), shell_ambient.end(), ambient);
    if (it == shell_ambient.end() || *it != ambient)
      throw std::out_of_range("completed shell: not a shell vertex");
    return static_cast<Vertex>(it - shell_ambient.begin());
  }
};

namespace shell_detail {

// Arcs: one per unordered shell pair with ambient distance in [1, s].
struct ArcPlan {
  VertexSet shell;
  std::vector<std::tuple<Vertex, Vertex, int>> arcs;  // (a, b, ambient distance)
};

inline ArcPlan plan_arcs(const Graph& g, const VertexSet& w, int K, int s) {
  if (K < 0) throw std::invalid_argument("shell radius must be nonnegative");
  if (s < 1) throw std::invalid_argument("completion scale must be >= 1");
  ArcPlan plan;
  plan.shell = sphere_and_tube(g, w, K).shell;
  for (std::size_t i = 0; i < plan.shell.size(); ++i) {
    DistanceField d(g, plan.shell[i]);
    for (std::size_t j = i + 1; j < plan.shell.size(); ++j) {
      int dist = d.at_or(plan.shell[j], -1);
      if (dist >= 1 && dist <= s) plan.arcs.emplace_back(plan.shell[i], plan.shell[j], dist);
    }
  }
  return plan;
}

}  // namespace shell_detail

// The completed K-shell at scale s: shell vertices joined, for each pair at
// ambient distance <= s, by a fresh arc of that length (so the result stays
// a simple graph).
inline CompletedShell completed_shell(const Graph& g, const VertexSet& w, int K, int s) {
  auto plan = shell_detail::plan_arcs(g, w, K, s);
  CompletedShell cs;
  cs.K = K;
  cs.scale_s = s;
  cs.shell_ambient = plan.shell;
  cs.graph = Graph(static_cast<int>(plan.shell.size()));
  for (std::size_t i = 0; i < plan.shell.size(); ++i) {
    cs.to_ambient.push_back(plan.shell[i]);
    cs.graph.set_label(static_cast<Vertex>(i), "shell");
  }
  for (auto [a, b, dist] : plan.arcs) {
    Vertex prev = cs.cs_of_ambient(a);
    for (int step = 1; step < dist; ++step) {
      Vertex fresh = cs.graph.add_vertex();
      cs.graph.set_label(fresh, "arc");
      cs.to_ambient.push_back(-1);
      cs.graph.add_edge(prev, fresh);
      prev = fresh;
    }
    cs.graph.add_edge(prev, cs.cs_of_ambient(b));
  }
  cs.components = cs.graph.num_vertices() == 0 ? 0 : component_count(cs.graph);
  return cs;
}

struct CompletedTubeComplement {
  Graph graph;                       // complement vertices then arc vertices
  std::vector<Vertex> to_ambient;    // -1 for arc vertices
  std::vector<Vertex> from_ambient;  // ambient -> ctc id, -1 inside the tube
  VertexSet shell;                   // ctc ids of shell vertices
  int K = 0;
  int scale_s = 0;
  bool connected = false;
};

// Ambient minus the open tube, glued to the completed shell along the shell.
inline CompletedTubeComplement completed_tube_complement(const Graph& g, const VertexSet& w,
                                                         int K, int s) {
  CompletedTubeComplement ctc;
  ctc.K = K;
  ctc.scale_s = s;
  if (w.empty()) {
    // Empty subset: nothing removed, nothing completed.
    ctc.graph = g;
    ctc.from_ambient.resize(g.num_vertices());
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      ctc.to_ambient.push_back(v);
      ctc.from_ambient[v] = v;
      ctc.graph.set_label(v, "ambient");
    }
    ctc.connected = is_connected(ctc.graph);
    return ctc;
  }
  auto plan = shell_detail::plan_arcs(g, w, K, s);
  DistanceField d(g, w);
  VertexSet keep;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (!d.reachable(v) || d.at(v) >= K) keep.push_back(v);

  ctc.from_ambient.assign(g.num_vertices(), -1);
  ctc.graph = Graph(static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    ctc.from_ambient[keep[i]] = static_cast<Vertex>(i);
    ctc.to_ambient.push_back(keep[i]);
    bool on_shell = d.reachable(keep[i]) && d.at(keep[i]) == K;
    // Provenance composes: kept vertices keep their source tags so that
    // iterated constructions can still recognize glued horoballs.
    std::string inherited = g.has_labels() ? g.label(keep[i]) : "";
    ctc.graph.set_label(static_cast<Vertex>(i),
                        on_shell ? "shell" : (inherited.empty() ? "ambient" : inherited));
    if (on_shell) ctc.shell.push_back(static_cast<Vertex>(i));
  }
  for (Vertex u : keep)
    for (Vertex v : g.neighbors(u))
      if (u < v && ctc.from_ambient[v] != -1)
        ctc.graph.add_edge(ctc.from_ambient[u], ctc.from_ambient[v]);
  for (auto [a, b, dist] : plan.arcs) {
    Vertex prev = ctc.from_ambient[a];
    for (int step = 1; step < dist; ++step) {
      Vertex fresh = ctc.graph.add_vertex();
      ctc.graph.set_label(fresh, "arc");
      ctc.to_ambient.push_back(-1);
      ctc.graph.add_edge(prev, fresh);
      prev = fresh;
    }
    ctc.graph.add_edge(prev, ctc.from_ambient[b]);
  }
  ctc.connected = ctc.graph.num_vertices() == 0 ? false : is_connected(ctc.graph);
  return ctc;
}

// ---------------------------------------------------------------------------
// Shell projections from far points
// ---------------------------------------------------------------------------

struct ShellProjection {
  const Graph* graph = nullptr;
  VertexSet w;
  int K = 0;
  Vertex basepoint = -1;  // must lie on w
};

// Last point at distance exactly K from W along the canonical geodesic from
// the basepoint to p.
inline Vertex project_far_point(const Graph& g, const ShellProjection& proj, Vertex p) {
  DistanceField dw(g, proj.w);
  if (!dw.reachable(p) || dw.at(p) < proj.K)
    throw std::invalid_argument("project_far_point: point inside the tube");
  if (!set_contains(proj.w, proj.basepoint))
    throw std::invalid_argument("project_far_point: basepoint must lie on W");
  DistanceField db(g, proj.basepoint);
  auto ray = canonical_geodesic(g, db, proj.basepoint, p);
  Vertex last = -1;
  for (Vertex v : ray)
    if (dw.at(v) == proj.K) last = v;
  if (last == -1) throw std::logic_error("project_far_point: ray does not meet the shell");
  return last;
}

// Stability over all basepoint variations (Pi_K changes by <= slack) and
// coarse surjectivity of the projection onto the shell interior.
inline Report projection_stability_audit(const Graph& g, const VertexSet& w, int K,
                                         const VertexSet& far_points, const Rat& slack,
                                         const VertexSet& shell_interior = {}) {
  Report rep("projection-stability", Verdict::Pass);
  DistanceField dw(g, w);
  std::vector<std::vector<Vertex>> projections(far_points.size());
  for (Vertex base : w) {
    DistanceField db(g, base);
    for (std::size_t i = 0; i < far_points.size(); ++i) {
      auto ray = canonical_geodesic(g, db, base, far_points[i]);
      Vertex last = -1;
      for (Vertex v : ray)
        if (dw.at(v) == K) last = v;
      if (last != -1) projections[i].push_back(last);
    }
  }
  Rat worst = 0;
  for (std::size_t i = 0; i < far_points.size(); ++i) {
    if (projections[i].size() < 2) continue;
    DistanceField d0(g, projections[i][0]);
    for (std::size_t j = 1; j < projections[i].size(); ++j)
      worst = rat_max(worst, Rat(d0.at(projections[i][j])));
    // All pairs via the first point underestimates; do the full sweep.
    for (std::size_t a = 0; a < projections[i].size(); ++a) {
      DistanceField da(g, projections[i][a]);
      for (std::size_t b = a + 1; b < projections[i].size(); ++b)
        worst = rat_max(worst, Rat(da.at(projections[i][b])));
    }
    if (worst > slack) {
      rep.verdict = Verdict::Fail;
      rep.details["witness_far_point"] = far_points[i];
      break;
    }
  }
  rep.details["max_projection_spread"] = rat_double(worst);
  rep.details["slack"] = rat_double(slack);

  if (!shell_interior.empty() && rep.verdict == Verdict::Pass) {
    VertexSet all_proj;
    for (auto& ps : projections) all_proj.insert(all_proj.end(), ps.begin(), ps.end());
    normalize_set(all_proj);
    if (all_proj.empty()) {
      rep.verdict = Verdict::Inconclusive;
      rep.details["reason"] = "no projections landed on the shell";
      return rep;
    }
    DistanceField dp(g, all_proj);
    Rat surj = 0;
    Vertex witness = -1;
    for (Vertex v : shell_interior) {
      Rat dv(dp.at_or(v, 1 << 28));
      if (dv > surj) {
        surj = dv;
        witness = v;
      }
    }
    rep.details["coarse_surjectivity_slack"] = rat_double(surj);
    if (surj > slack) {
      rep.verdict = Verdict::Fail;
      rep.details["surjectivity_witness"] = witness;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Shell connectivity and Phi
// ---------------------------------------------------------------------------

inline Report shell_connectivity_audit(const CompletedShell& cs) {
  Report rep("shell-connectivity", Verdict::Pass);
  rep.details["K"] = cs.K;
  rep.details["scale_s"] = cs.scale_s;
  rep.details["components"] = cs.components;
  rep.details["shell_size"] = cs.shell_ambient.size();
  if (cs.shell_ambient.empty()) {
    rep.verdict = Verdict::Inconclusive;
    rep.details["reason"] = "empty shell";
    return rep;
  }
  if (cs.components != 1) {
    rep.verdict = Verdict::Fail;
    // Witness cut: one shell vertex from each of two components.
    auto comp = component_ids(cs.graph);
    Vertex first = 0;
    Vertex second = -1;
    for (Vertex v = 0; v < cs.graph.num_vertices(); ++v)
      if (comp[v] != comp[first]) {
        second = v;
        break;
      }
    rep.details["witness_cut"] = {cs.to_ambient[first], second >= 0 ? cs.to_ambient[second] : -1};
  }
  return rep;
}

struct PhiEstimate {
  bool bounded = true;
  int value = 0;       // max completed-shell distance over close ambient pairs
  int pairs = 0;
};

// Phi(C): max completed-shell distance between shell vertices at ambient
// distance <= C; unbounded when such a pair spans two components.
inline PhiEstimate phi_estimate(const Graph& g, const CompletedShell& cs, int C) {
  PhiEstimate est;
  for (std::size_t i = 0; i < cs.shell_ambient.size(); ++i) {
    DistanceField damb(g, cs.shell_ambient[i]);
    DistanceField dcs(cs.graph, cs.cs_of_ambient(cs.shell_ambient[i]));
    for (std::size_t j = i + 1; j < cs.shell_ambient.size(); ++j) {
      int da = damb.at_or(cs.shell_ambient[j], -1);
      if (da < 0 || da > C) continue;
      ++est.pairs;
      Vertex target = cs.cs_of_ambient(cs.shell_ambient[j]);
      if (!dcs.reachable(target)) {
        est.bounded = false;
        return est;
      }
      est.value = std::max(est.value, dcs.at(target));
    }
  }
  return est;
}

// Measured Phi as a table over integer arguments 0..max_arg.
inline std::vector<int> phi_table(const Graph& g, const CompletedShell& cs, int max_arg) {
  std::vector<int> table(max_arg + 1, 0);
  for (int c = 1; c <= max_arg; ++c) {
    auto est = phi_estimate(g, cs, c);
    if (!est.bounded) throw std::domain_error("phi_table: unbounded at argument " + std::to_string(c));
    table[c] = std::max(est.value, c > 0 ? table[c - 1] : 0);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Tube comparability
// ---------------------------------------------------------------------------

// Graph isomorphism N_alpha(W_a) -> N_alpha(W_b) carrying W_a onto W_b.
inline std::optional<std::vector<Vertex>> tube_comparable(const Graph& ga, const VertexSet& wa,
                                                          const Graph& gb, const VertexSet& wb,
                                                          int alpha) {
  if (alpha < 1) throw std::invalid_argument("tube_comparable: alpha must be >= 1");
  auto build = [&](const Graph& g, const VertexSet& w) {
    DistanceField d(g, w);
    VertexSet keep;
    for (Vertex v = 0; v < g.num_vertices(); ++v)
      if (d.reachable(v) && d.at(v) <= alpha) keep.push_back(v);
    auto [sub, ids] = induced_subgraph(g, keep);
    std::vector<std::uint64_t> colour(sub.num_vertices());
    for (std::size_t i = 0; i < ids.size(); ++i)
      colour[i] = 0x51ed2700ull + static_cast<std::uint64_t>(d.at(ids[i]));
    return std::tuple<Graph, VertexSet, std::vector<std::uint64_t>>(std::move(sub), std::move(ids),
                                                                    std::move(colour));
  };
  auto [sa, ids_a, col_a] = build(ga, wa);
  auto [sb, ids_b, col_b] = build(gb, wb);
  return find_isomorphism(sa, sb, col_a, col_b);
}

// ---------------------------------------------------------------------------
// Boundary-path projection
// ---------------------------------------------------------------------------

// Projects a far-point sample path: consecutive projections must lie within
// `step_slack` in the ambient metric, and the result concatenates canonical
// completed-shell geodesics between them.
inline std::vector<Vertex> project_boundary_path(const Graph& g, const ShellProjection& proj,
                                                 const CompletedShell& cs,
                                                 const std::vector<Vertex>& sample_path,
                                                 const Rat& step_slack) {
  if (sample_path.empty()) throw std::invalid_argument("project_boundary_path: empty sample");
  std::vector<Vertex> projected;
  for (Vertex p : sample_path) projected.push_back(project_far_point(g, proj, p));
  for (std::size_t i = 0; i + 1 < projected.size(); ++i) {
    DistanceField d(g, projected[i]);
    if (Rat(d.at(projected[i + 1])) > step_slack)
      throw std::domain_error("project_boundary_path: consecutive projections exceed slack; refine the sample");
  }
  std::vector<Vertex> out{cs.cs_of_ambient(projected[0])};
  for (std::size_t i = 0; i + 1 < projected.size(); ++i) {
    Vertex a = cs.cs_of_ambient(projected[i]);
    Vertex b = cs.cs_of_ambient(projected[i + 1]);
    DistanceField d(cs.graph, a);
    auto seg = canonical_geodesic(cs.graph, d, a, b);
    out.insert(out.end(), seg.begin() + 1, seg.end());
  }
  return out;
}

// Hausdorff distance of two paths in the completed-shell metric.
inline int cs_path_hausdorff(const CompletedShell& cs, const std::vector<Vertex>& a,
                             const std::vector<Vertex>& b) {
  int worst = 0;
  for (Vertex v : a) {
    DistanceField d(cs.graph, v);
    int best = 1 << 28;
    for (Vertex u : b) best = std::min(best, d.at_or(u, 1 << 28));
    worst = std::max(worst, best);
  }
  for (Vertex u : b) {
    DistanceField d(cs.graph, u);
    int best = 1 << 28;
    for (Vertex v : a) best = std::min(best, d.at_or(v, 1 << 28));
    worst = std::max(worst, best);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Geometry audits at the truncation scale
// ---------------------------------------------------------------------------

// Retraction of a completed tube complement onto its embedded completed
// shell: descend the distance field inside the complement graph; axioms
// verified at the caller's Q (the shell-distance comparison constant, of
// the order 2*Phi(2*delta+1)).
inline Retraction ctc_retraction(const CompletedTubeComplement& ctc, const Rat& q_constant) {
  VertexSet cs_embedded = ctc.shell;
  for (Vertex v = 0; v < ctc.graph.num_vertices(); ++v)
    if (ctc.graph.label(v) == "arc") cs_embedded.push_back(v);
  normalize_set(cs_embedded);
  return project_retraction_with_q(ctc.graph, cs_embedded, 0, q_constant);
}

// Tube quasi-convexity: geodesics between tube points stay within slack of
// the tube (checked over the full shortest-path DAG of each sampled pair).
inline Report tube_quasiconvexity_audit(const Graph& g, const VertexSet& w, int K,
                                        const Rat& slack, std::size_t max_pairs = 400) {
  Report rep("tube-quasiconvexity", Verdict::Pass);
  auto parts = sphere_and_tube(g, w, K);
  VertexSet tube = parts.open_tube;
  DistanceField dtube(g, tube);
  Rat worst = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < tube.size() && pairs < max_pairs; i += std::max<std::size_t>(1, tube.size() / 20)) {
    DistanceField di(g, tube[i]);
    for (std::size_t j = i + 1; j < tube.size() && pairs < max_pairs;
         j += std::max<std::size_t>(1, tube.size() / 20)) {
      ++pairs;
      int dij = di.at(tube[j]);
      DistanceField dj(g, tube[j]);
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        if (di.at_or(v, -1) < 0 || dj.at_or(v, -1) < 0) continue;
        if (di.at(v) + dj.at(v) != dij) continue;
        worst = rat_max(worst, Rat(dtube.at_or(v, 1 << 28)));
      }
    }
  }
  rep.details["max_excursion"] = rat_double(worst);
  rep.details["pairs"] = pairs;
  if (worst > slack) rep.verdict = Verdict::Fail;
  return rep;
}

// Straightness: along canonical rays from W, any point near the shell after
// a crossing stays within `slack` of that crossing.
inline Report straightness_audit(const Graph& g, const VertexSet& w, int K,
                                 const VertexSet& far_points, Vertex basepoint,
                                 const Rat& near_slack, const Rat& slack) {
  Report rep("shell-straightness", Verdict::Pass);
  DistanceField dw(g, w);
  auto parts = sphere_and_tube(g, w, K);
  DistanceField dshell(g, parts.shell);
  DistanceField db(g, basepoint);
  Rat worst = 0;
  for (Vertex p : far_points) {
    auto ray = canonical_geodesic(g, db, basepoint, p);
    std::vector<Vertex> crossings;
    for (Vertex v : ray)
      if (dw.at(v) == K) crossings.push_back(v);
    for (Vertex y : crossings) {
      DistanceField dy(g, y);
      for (Vertex z : ray) {
        if (Rat(dshell.at_or(z, 1 << 28)) > near_slack) continue;
        worst = rat_max(worst, Rat(dy.at(z)));
      }
    }
  }
  rep.details["max_crossing_spread"] = rat_double(worst);
  if (worst > slack) rep.verdict = Verdict::Fail;
  return rep;
}

}  // namespace drill

#endif  // DRILL_SHELLS_HPP_
