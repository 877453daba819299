// The drilling pipeline: cusped spaces (tube complement + horoball over the
// completed shell), the case-split path family and its certificate,
// unwrap-and-glue (Z-cover of the tube complement with a horoball over the
// unwrapped shell), ball/local-model audits, separated families,
// hollowed-out spaces, iterated unwrapping, the constants ledger, and the
// very-translating check.

#ifndef DRILL_DRILLING_HPP_
#define DRILL_DRILLING_HPP_

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drill/coarse_topology.hpp"
#include "drill/graph.hpp"
#include "drill/horoball.hpp"
#include "drill/hyperbolicity.hpp"
#include "drill/numeric.hpp"
#include "drill/report.hpp"
#include "drill/shells.hpp"

namespace drill {

// ---------------------------------------------------------------------------
// Cusped spaces
// ---------------------------------------------------------------------------

struct CuspedSpace {
  Graph graph;
  CompletedTubeComplement ctc;
  CompletedShell cs;
  int depth_max = 0;
  std::vector<Vertex> cs_to_ctc;  // completed-shell vertex -> ctc vertex
  // Layout: [0, n_ctc) ctc vertices; horoball depth d >= 1, shell vertex i
  // at n_ctc + (d-1)*n_cs + i.

  int n_ctc() const { return ctc.graph.num_vertices(); }
  int n_cs() const { return cs.graph.num_vertices(); }

  Vertex horoball_vertex(Vertex cs_id, int depth) const {
    if (depth == 0) return cs_to_ctc[cs_id];
    return n_ctc() + (depth - 1) * n_cs() + cs_id;
  }
  int depth_of(Vertex v) const {
    return v < n_ctc() ? 0 : 1 + (v - n_ctc()) / n_cs();
  }
  // Shell coordinate of a horoball vertex (or of a depth-0 shell/arc vertex).
  Vertex cs_id_of(Vertex v) const {
    if (v >= n_ctc()) return (v - n_ctc()) % n_cs();
    for (std::size_t c = 0; c < cs_to_ctc.size(); ++c)
      if (cs_to_ctc[c] == v) return static_cast<Vertex>(c);
    return -1;
  }
};

// Glues the combinatorial horoball over the completed shell to the completed
// tube complement.  The depth-0 layer coincides with the shell copy inside
// the complement.
inline CuspedSpace cusp(const Graph& g, const VertexSet& w, int K, int s, int depth_max) {
  CuspedSpace c;
  c.depth_max = depth_max;
  c.cs = completed_shell(g, w, K, s);
  if (c.cs.components != 1)
    throw std::invalid_argument("cusp: completed shell is not connected");
  c.ctc = completed_tube_complement(g, w, K, s);

  // The shell/arc vertices were appended in the same canonical arc order in
  // both constructions.
  int shell_count = static_cast<int>(c.cs.shell_ambient.size());
  int keep_count = 0;
  for (Vertex v = 0; v < c.ctc.graph.num_vertices(); ++v)
    if (c.ctc.to_ambient[v] != -1) ++keep_count;
  c.cs_to_ctc.resize(c.cs.graph.num_vertices());
  for (Vertex cv = 0; cv < c.cs.graph.num_vertices(); ++cv) {
    if (cv < shell_count)
      c.cs_to_ctc[cv] = c.ctc.from_ambient[c.cs.to_ambient[cv]];
    else
      c.cs_to_ctc[cv] = keep_count + (cv - shell_count);
  }

  c.graph = c.ctc.graph;
  for (Vertex v = 0; v < c.ctc.graph.num_vertices(); ++v)
    if (c.graph.label(v).empty()) c.graph.set_label(v, "complement");
  // Shell distances drive the horizontal edges at every depth.
  auto dcs = all_pairs_distances(c.cs.graph);
  int n_cs = c.cs.graph.num_vertices();
  for (int depth = 1; depth <= depth_max; ++depth)
    for (int i = 0; i < n_cs; ++i) {
      Vertex fresh = c.graph.add_vertex();
      c.graph.set_label(fresh, "horoball:" + std::to_string(depth));
      if (fresh != c.horoball_vertex(i, depth))
        throw std::logic_error("cusp: vertex layout mismatch");
    }
  for (int depth = 1; depth <= depth_max; ++depth) {
    long long reach = depth >= 40 ? (1ll << 40) : (1ll << depth);
    for (int i = 0; i < n_cs; ++i) {
      c.graph.add_edge(c.horoball_vertex(i, depth - 1), c.horoball_vertex(i, depth));
      for (int j = i + 1; j < n_cs; ++j)
        if (dcs[i][j] >= 0 && dcs[i][j] <= reach)
          c.graph.add_edge(c.horoball_vertex(i, depth), c.horoball_vertex(j, depth));
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// The case-split path family on a cusped space
// ---------------------------------------------------------------------------

namespace drill_detail {

// Canonical descent path from a complement vertex to its nearest shell
// vertex, inside the ctc graph (distance field over the shell copy).
inline std::vector<Vertex> descend_to_shell(const Graph& ctc_graph, const DistanceField& dshell,
                                            Vertex from) {
  std::vector<Vertex> path{from};
  Vertex cur = from;
  while (dshell.at(cur) > 0) {
    Vertex next = -1;
    for (Vertex u : ctc_graph.neighbors(cur))
      if (dshell.at_or(u, 1 << 29) == dshell.at(cur) - 1) {
        next = u;
        break;
      }
    cur = next;
    path.push_back(cur);
  }
  return path;
}

}  // namespace drill_detail

// Builds the path family of the cusped space certificate: geodesics outside
// the tube, rerouted through the horoball when the ambient geodesic would
// cross it, horoball geodesics inside.  Adjacent pairs are single edges.
inline PathFamily cusp_path_family(const CuspedSpace& c, const Graph& ambient, const VertexSet& w) {
  int n = c.graph.num_vertices();
  PathFamily fam(n);

  DistanceField dw(ambient, w);
  // Shell set inside the ctc graph.
  VertexSet shell_ctc = c.ctc.shell;
  DistanceField dshell(c.ctc.graph, shell_ctc);
  // Horoball subgraph: depth-0 layer plus all deeper layers.
  VertexSet horo;
  for (Vertex cs_id = 0; cs_id < c.n_cs(); ++cs_id)
    for (int depth = 0; depth <= c.depth_max; ++depth)
      horo.push_back(c.horoball_vertex(cs_id, depth));
  normalize_set(horo);
  auto [horo_graph, horo_ids] = induced_subgraph(c.graph, horo);
  auto horo_index = [&](Vertex v) {
    return static_cast<Vertex>(std::lower_bound(horo_ids.begin(), horo_ids.end(), v) - horo_ids.begin());
  };

  // Resolution of a ctc vertex to an ambient-representable one, with the
  // connecting prefix (arc interiors walk to their nearer endpoint).
  std::vector<std::vector<Vertex>> prefix(c.n_ctc());
  for (Vertex v = 0; v < c.n_ctc(); ++v) {
    if (c.ctc.to_ambient[v] != -1) {
      prefix[v] = {v};
    } else {
      prefix[v] = drill_detail::descend_to_shell(c.ctc.graph, dshell, v);
    }
  }

  // Precomputed per-vertex BFS fields, reused across pairs.
  std::vector<DistanceField> amb_fields;
  amb_fields.reserve(ambient.num_vertices());
  for (Vertex v = 0; v < ambient.num_vertices(); ++v) amb_fields.emplace_back(ambient, v);
  std::vector<DistanceField> horo_fields;
  for (Vertex v = 0; v < horo_graph.num_vertices(); ++v) horo_fields.emplace_back(horo_graph, v);

  auto horo_geodesic = [&](Vertex a_cusp, Vertex b_cusp) {
    Vertex a = horo_index(a_cusp), b = horo_index(b_cusp);
    auto seg = canonical_geodesic(horo_graph, horo_fields[a], a, b);
    std::vector<Vertex> out;
    for (Vertex x : seg) out.push_back(horo_ids[x]);
    return out;
  };
  // Nearest shell vertex in the ctc metric, canonical tie-break.
  auto nearest_shell = [&](Vertex v_ctc) { return drill_detail::descend_to_shell(c.ctc.graph, dshell, v_ctc); };

  auto append = [](std::vector<Vertex>& out, const std::vector<Vertex>& seg, bool skip_first) {
    for (std::size_t i = skip_first ? 1 : 0; i < seg.size(); ++i) out.push_back(seg[i]);
  };

  for (Vertex x = 0; x < n; ++x) {
    for (Vertex y = x; y < n; ++y) {
      if (x == y) {
        fam.set(x, y, {x});
        continue;
      }
      if (c.graph.has_edge(x, y)) {
        fam.set(x, y, {x, y});
        continue;
      }
      bool hx = c.depth_of(x) >= 1, hy = c.depth_of(y) >= 1;
      std::vector<Vertex> path;
      if (hx && hy) {
        path = horo_geodesic(x, y);
      } else if (hx != hy) {
        Vertex outside = hx ? y : x;
        Vertex inside = hx ? x : y;
        auto pre = nearest_shell(outside);
        path = pre;
        append(path, horo_geodesic(pre.back(), inside), true);
        if (outside == y) std::reverse(path.begin(), path.end());
      } else {
        // Both outside the open horoball: try the ambient geodesic.
        auto pre_x = prefix[x];
        auto pre_y = prefix[y];
        Vertex ax = c.ctc.to_ambient[pre_x.back()], ay = c.ctc.to_ambient[pre_y.back()];
        auto amb = canonical_geodesic(ambient, amb_fields[ax], ax, ay);
        bool misses_tube = true;
        for (Vertex v : amb)
          if (dw.at(v) < c.ctc.K) {
            misses_tube = false;
            break;
          }
        path = pre_x;
        if (misses_tube) {
          std::vector<Vertex> mapped;
          for (Vertex v : amb) mapped.push_back(c.ctc.from_ambient[v]);
          append(path, mapped, true);
        } else {
          auto to_shell_x = nearest_shell(pre_x.back());
          auto to_shell_y = nearest_shell(pre_y.back());
          append(path, to_shell_x, true);
          append(path, horo_geodesic(to_shell_x.back(), to_shell_y.back()), true);
          std::vector<Vertex> back = to_shell_y;
          std::reverse(back.begin(), back.end());
          append(path, back, true);
        }
        std::vector<Vertex> back = pre_y;
        std::reverse(back.begin(), back.end());
        append(path, back, true);
      }
      fam.set(x, y, std::move(path));
    }
  }
  return fam;
}

// Measures the family's slim-triple/short-pair constant and certifies at the
// smallest power-of-two style ladder value that passes.
struct CuspCertificate {
  Certificate certificate;
  Rat h_used = 0;
  PathFamily family;

  CuspCertificate(Certificate cert, Rat h, PathFamily fam)
      : certificate(std::move(cert)), h_used(std::move(h)), family(std::move(fam)) {}
};

inline CuspCertificate certify_cusp(const CuspedSpace& c, const Graph& ambient, const VertexSet& w,
                                    int h_cap = 64) {
  PathFamily fam = cusp_path_family(c, ambient, w);
  for (int h = 1; h <= h_cap; h = (h < 8 ? h + 1 : h * 2)) {
    Certificate cert = certify_guess_geodesics(c.graph, fam, h);
    if (cert.ok) return CuspCertificate(std::move(cert), Rat(h), std::move(fam));
  }
  Certificate last = certify_guess_geodesics(c.graph, fam, h_cap);
  return CuspCertificate(std::move(last), Rat(h_cap), std::move(fam));
}

// ---------------------------------------------------------------------------
// Unwrap and glue
// ---------------------------------------------------------------------------

struct UnwrappedSpace {
  Graph graph;
  CuspedSpace base;        // the quotient target
  CoverTruncation cover;   // Z-cover of the ctc graph
  int depth_max = 0;
  int n_cover = 0;
  std::vector<Vertex> ucs;          // cover vertices forming the unwrapped shell
  std::vector<Vertex> q_map;        // unwrapped vertex -> cusp vertex
  std::vector<int> depth_map;       // 0 on the cover part
  GroupVerdict ctc_classification;

  Vertex horoball_vertex(int ucs_index, int depth) const {
    if (depth == 0) return ucs[ucs_index];
    return n_cover + (depth - 1) * static_cast<int>(ucs.size()) + ucs_index;
  }

  // Deck translation by +1 where defined (cover part and glued horoball).
  Vertex deck(Vertex v, int power = 1) const {
    if (v < n_cover) return cover.deck(v, power);
    int idx = (v - n_cover) % static_cast<int>(ucs.size());
    int depth = 1 + (v - n_cover) / static_cast<int>(ucs.size());
    Vertex shifted = cover.deck(ucs[idx], power);
    if (shifted == -1) return -1;
    auto it = std::lower_bound(ucs.begin(), ucs.end(), shifted);
    if (it == ucs.end() || *it != shifted) return -1;
    return horoball_vertex(static_cast<int>(it - ucs.begin()), depth);
  }
};

// Takes the D-universal (here Z-) cover of the completed tube complement and
// glues a horoball over the full unwrapped shell; the quotient map q is
// depth-preserving.  Requires pi_1^D(CTC) certified infinite cyclic.
inline UnwrappedSpace unwrap_and_glue(const Graph& g, const VertexSet& w, int K, int s, int D,
                                      int window, int depth_max) {
  UnwrappedSpace u;
  u.depth_max = depth_max;
  u.base = cusp(g, w, K, s, depth_max);
  auto pres = pi1D_presentation(u.base.ctc.graph, D, 0);
  u.ctc_classification = classify_small(pres);
  if (u.ctc_classification.kind != GroupVerdict::Kind::InfiniteCyclic)
    throw std::domain_error(
        "unwrap_and_glue: pi_1^D of the tube complement is not certified infinite cyclic (got " +
        std::string(u.ctc_classification.kind_name()) + ")");
  std::vector<long> hom;
  for (const auto& z : u.ctc_classification.z_map) hom.push_back(z.convert_to<long>());
  u.cover = z_cover(u.base.ctc.graph, D, hom, window, 0);
  u.n_cover = u.cover.total.num_vertices();

  // The unwrapped shell: all fibers over the embedded completed shell.
  VertexSet cs_in_ctc(u.base.cs_to_ctc.begin(), u.base.cs_to_ctc.end());
  normalize_set(cs_in_ctc);
  for (Vertex base : cs_in_ctc)
    for (int f = -window; f <= window; ++f) u.ucs.push_back(u.cover.cover_vertex(base, f));
  normalize_set(u.ucs);
  auto [ucs_graph, ucs_ids] = induced_subgraph(u.cover.total, u.ucs);
  if (!is_connected(ucs_graph))
    throw std::logic_error("unwrap_and_glue: unwrapped shell is not connected");

  u.graph = u.cover.total;
  for (Vertex v = 0; v < u.n_cover; ++v) {
    Vertex base = u.cover.base_of[v];
    std::string label = u.base.ctc.graph.label(base);
    u.graph.set_label(v, label.empty() ? "complement" : label);
  }
  int n_ucs = static_cast<int>(u.ucs.size());
  auto ducs = all_pairs_distances(ucs_graph);
  for (int depth = 1; depth <= depth_max; ++depth)
    for (int i = 0; i < n_ucs; ++i) {
      Vertex fresh = u.graph.add_vertex();
      u.graph.set_label(fresh, "horoball:" + std::to_string(depth));
      if (fresh != u.horoball_vertex(i, depth))
        throw std::logic_error("unwrap_and_glue: vertex layout mismatch");
    }
  for (int depth = 1; depth <= depth_max; ++depth) {
    long long reach = depth >= 40 ? (1ll << 40) : (1ll << depth);
    for (int i = 0; i < n_ucs; ++i) {
      u.graph.add_edge(u.horoball_vertex(i, depth - 1), u.horoball_vertex(i, depth));
      for (int j = i + 1; j < n_ucs; ++j)
        if (ducs[i][j] >= 0 && ducs[i][j] <= reach)
          u.graph.add_edge(u.horoball_vertex(i, depth), u.horoball_vertex(j, depth));
    }
  }

  // Quotient map: cover projection extended depth-preservingly.
  std::vector<Vertex> ctc_to_cs(u.base.n_ctc(), -1);
  for (std::size_t cs_id = 0; cs_id < u.base.cs_to_ctc.size(); ++cs_id)
    ctc_to_cs[u.base.cs_to_ctc[cs_id]] = static_cast<Vertex>(cs_id);
  u.q_map.resize(u.graph.num_vertices());
  u.depth_map.assign(u.graph.num_vertices(), 0);
  for (Vertex v = 0; v < u.n_cover; ++v) u.q_map[v] = u.cover.base_of[v];
  for (int depth = 1; depth <= depth_max; ++depth)
    for (int i = 0; i < n_ucs; ++i) {
      Vertex v = u.horoball_vertex(i, depth);
      u.depth_map[v] = depth;
      Vertex cover_shell = u.ucs[i];
      Vertex cs_id = ctc_to_cs[u.cover.base_of[cover_shell]];
      u.q_map[v] = u.base.horoball_vertex(cs_id, depth);
    }

  // q is a graph morphism (edges map to edges or collapse).
  for (auto [a, b] : u.graph.edges()) {
    Vertex qa = u.q_map[a], qb = u.q_map[b];
    if (qa != qb && !u.base.graph.has_edge(qa, qb))
      throw std::logic_error("unwrap_and_glue: quotient is not a graph morphism");
  }
  return u;
}

// ---------------------------------------------------------------------------
// Ball isometry and local model audits
// ---------------------------------------------------------------------------

// Minimum displacement of the deck translation, measured over the whole
// space: the desk-scale surrogate for the systole mechanism.
inline int measured_deck_displacement(const UnwrappedSpace& u) {
  int best = -1;
  for (Vertex v = 0; v < u.graph.num_vertices(); ++v) {
    Vertex dv = u.deck(v);
    if (dv == -1) continue;
    DistanceField d(u.graph, v);
    if (!d.reachable(dv)) continue;
    if (best == -1 || d.at(dv) < best) best = d.at(dv);
  }
  return best;
}

// q restricted to B(z, 3*sigma) must be a bijective isometry onto the full
// ball around q(z), for sampled centres z at depth <= 3*sigma.
inline Report ball_isometry_audit(const UnwrappedSpace& u, int sigma,
                                  const VertexSet& centres_in = {}) {
  Report rep("ball-isometry", Verdict::Pass);
  int radius = 3 * sigma;
  VertexSet centres = centres_in;
  if (centres.empty()) {
    for (Vertex v = 0; v < u.graph.num_vertices(); v += std::max(1, u.graph.num_vertices() / 24))
      centres.push_back(v);
    normalize_set(centres);
  }
  int shell_systole = -1;
  {
    for (Vertex v : u.ucs) {
      Vertex dv = u.deck(v);
      if (dv == -1) continue;
      DistanceField d(u.cover.total, v);
      if (!d.reachable(dv)) continue;
      if (shell_systole == -1 || d.at(dv) < shell_systole) shell_systole = d.at(dv);
    }
  }
  rep.details["sigma"] = sigma;
  rep.details["measured_shell_systole"] = shell_systole;
  rep.details["measured_deck_displacement"] = measured_deck_displacement(u);

  std::size_t audited = 0, skipped = 0;
  for (Vertex z : centres) {
    if (u.depth_map[z] > radius) {
      ++skipped;
      continue;
    }
    DistanceField dz(u.graph, z);
    // Window hygiene: the ball must not touch the fiber truncation.
    bool clipped = false;
    VertexSet ball;
    for (Vertex v = 0; v < u.graph.num_vertices(); ++v) {
      if (!dz.reachable(v) || dz.at(v) > radius) continue;
      ball.push_back(v);
      Vertex probe = v < u.n_cover ? v : u.ucs[(v - u.n_cover) % u.ucs.size()];
      if (std::abs(u.cover.fiber_of[probe]) >= u.cover.window) clipped = true;
    }
    if (clipped) {
      ++skipped;
      continue;
    }
    ++audited;
    Vertex qz = u.q_map[z];
    DistanceField dq(u.base.graph, qz);
    VertexSet image_ball;
    for (Vertex v = 0; v < u.base.graph.num_vertices(); ++v)
      if (dq.reachable(v) && dq.at(v) <= radius) image_ball.push_back(v);
    // Injectivity and image coverage.
    VertexSet image;
    for (Vertex v : ball) image.push_back(u.q_map[v]);
    std::sort(image.begin(), image.end());
    bool injective = std::adjacent_find(image.begin(), image.end()) == image.end();
    if (!injective || image != image_ball) {
      rep.verdict = Verdict::Fail;
      rep.details["witness_centre"] = z;
      if (!injective) {
        // Exhibit the short essential loop behind the collision.
        for (std::size_t i = 0; i + 1 < ball.size(); ++i)
          for (std::size_t j = i + 1; j < ball.size(); ++j)
            if (u.q_map[ball[i]] == u.q_map[ball[j]]) {
              rep.details["witness_pair"] = {ball[i], ball[j]};
              rep.details["witness_loop_length"] = dz.at(ball[i]) + dz.at(ball[j]);
              i = ball.size();
              break;
            }
        rep.details["failure"] = "not injective";
      } else {
        rep.details["failure"] = "image is not the full ball";
      }
      rep.details["audited"] = audited;
      return rep;
    }
    // Distance preservation on the ball.
    for (Vertex a : ball) {
      DistanceField da(u.graph, a);
      DistanceField dqa(u.base.graph, u.q_map[a]);
      for (Vertex b : ball) {
        if (da.at(b) != dqa.at(u.q_map[b])) {
          rep.verdict = Verdict::Fail;
          rep.details["witness_pair"] = {a, b};
          rep.details["failure"] = "distance distorted";
          return rep;
        }
      }
    }
  }
  rep.details["audited"] = audited;
  rep.details["skipped"] = skipped;
  if (audited == 0) rep.verdict = Verdict::Inconclusive;
  return rep;
}

struct LocalModel {
  std::string name;
  const Graph* graph;
};

// Every sampled sigma-ball must be pointed-isomorphic to a ball in one of
// the supplied models; match provenance is recorded.
inline Report local_model_audit(const UnwrappedSpace& u, int sigma,
                                const std::vector<LocalModel>& models,
                                const VertexSet& centres_in = {}) {
  Report rep("local-model", Verdict::Pass);
  VertexSet centres = centres_in;
  if (centres.empty()) {
    for (Vertex v = 0; v < u.graph.num_vertices(); v += std::max(1, u.graph.num_vertices() / 20))
      centres.push_back(v);
    normalize_set(centres);
  }
  auto matches = json::array();
  for (Vertex z : centres) {
    PointedBall ball = ball_around(u.graph, z, sigma);
    // Strip labels: the model match is purely metric.
    Graph stripped(ball.graph.num_vertices());
    for (auto [a, b] : ball.graph.edges()) stripped.add_edge(a, b);
    PointedBall plain{std::move(stripped), ball.center, sigma};
    std::string matched;
    for (const auto& model : models) {
      for (Vertex c = 0; c < model.graph->num_vertices() && matched.empty(); ++c) {
        PointedBall mb = ball_around(*model.graph, c, sigma);
        if (mb.graph.num_vertices() != plain.graph.num_vertices()) continue;
        Graph mstripped(mb.graph.num_vertices());
        for (auto [a, b] : mb.graph.edges()) mstripped.add_edge(a, b);
        PointedBall mplain{std::move(mstripped), mb.center, sigma};
        if (pointed_isomorphic(plain, mplain).has_value()) matched = model.name;
      }
      if (!matched.empty()) break;
    }
    if (matched.empty()) {
      rep.verdict = Verdict::Fail;
      rep.details["witness_centre"] = z;
      return rep;
    }
    matches.push_back({{"centre", z}, {"model", matched}});
  }
  rep.details["matches"] = std::move(matches);
  rep.details["sigma"] = sigma;
  return rep;
}

// ---------------------------------------------------------------------------
// Separated families and hollowing out
// ---------------------------------------------------------------------------

struct FamilyMember {
  enum class Kind { Tube, Horoball } kind;
  VertexSet vertices;
  std::vector<Vertex> core;  // tubes only; an edge-path
};

struct SeparatedFamily {
  std::vector<FamilyMember> members;
  int chi = 0;       // separation constant
  int tube_k = 0;    // the tube radius the family was built with
};

struct ReferenceInstance {
  const Graph* graph;
  VertexSet core;
};

inline Report separated_family_audit(const Graph& g, const SeparatedFamily& fam,
                                     const std::optional<ReferenceInstance>& reference = {}) {
  Report rep("separated-family", Verdict::Pass);
  auto clauses = json::array();
  // (1) component types: tubes are exactly the open K-tubes of their cores.
  for (std::size_t m = 0; m < fam.members.size(); ++m) {
    const auto& member = fam.members[m];
    json entry;
    entry["member"] = m;
    entry["kind"] = member.kind == FamilyMember::Kind::Tube ? "tube" : "horoball";
    if (member.kind == FamilyMember::Kind::Tube) {
      VertexSet core_set(member.core.begin(), member.core.end());
      normalize_set(core_set);
      auto parts = sphere_and_tube(g, core_set, fam.tube_k);
      entry["is_open_tube"] = parts.open_tube == member.vertices;
      if (parts.open_tube != member.vertices) rep.verdict = Verdict::Fail;
      // (2) core comparability at chi/10.
      if (reference) {
        int alpha = std::max(1, fam.chi / 10);
        auto iso = tube_comparable(g, core_set, *reference->graph, reference->core, alpha);
        entry["core_comparable_alpha"] = alpha;
        entry["core_comparable"] = iso.has_value();
        if (!iso.has_value()) rep.verdict = Verdict::Fail;
      }
    } else {
      // (3) horoball neighbourhood shape: all member vertices carry horoball
      // provenance and the member meets the rest of the space only through
      // its depth-0 attachment.
      bool labelled = true;
      for (Vertex v : member.vertices)
        if (g.label(v).rfind("horoball", 0) != 0) labelled = false;
      entry["horoball_labelled"] = labelled;
      if (!labelled) rep.verdict = Verdict::Fail;
    }
    clauses.push_back(std::move(entry));
  }
  // (4) pairwise separation.
  int min_sep = -1;
  std::pair<int, int> witness{-1, -1};
  for (std::size_t a = 0; a < fam.members.size(); ++a) {
    DistanceField d(g, fam.members[a].vertices);
    for (std::size_t b = a + 1; b < fam.members.size(); ++b) {
      int best = -1;
      for (Vertex v : fam.members[b].vertices)
        if (d.reachable(v) && (best == -1 || d.at(v) < best)) best = d.at(v);
      if (best != -1 && (min_sep == -1 || best < min_sep)) {
        min_sep = best;
        witness = {static_cast<int>(a), static_cast<int>(b)};
      }
    }
  }
  rep.details["clauses"] = std::move(clauses);
  rep.details["min_separation"] = min_sep;
  if (fam.members.size() >= 2) {
    rep.details["witness_pair"] = {witness.first, witness.second};
    if (min_sep != -1 && min_sep < fam.chi) rep.verdict = Verdict::Fail;
  }
  rep.details["chi"] = fam.chi;
  return rep;
}

struct HollowedSpace {
  Graph graph;
  std::vector<Vertex> to_source;  // -1 for completion arcs
};

// Remove the open horoballs, then take the completed tube complement of the
// union of the tube cores in what remains.
inline HollowedSpace hollow_out(const Graph& g, const SeparatedFamily& fam, int s) {
  VertexSet removed;
  for (const auto& member : fam.members)
    if (member.kind == FamilyMember::Kind::Horoball)
      removed.insert(removed.end(), member.vertices.begin(), member.vertices.end());
  normalize_set(removed);
  VertexSet keep;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (!set_contains(removed, v)) keep.push_back(v);
  auto [stripped, ids] = induced_subgraph(g, keep);
  VertexSet cores;
  for (const auto& member : fam.members)
    if (member.kind == FamilyMember::Kind::Tube)
      for (Vertex v : member.core) {
        auto it = std::lower_bound(ids.begin(), ids.end(), v);
        if (it == ids.end() || *it != v) throw std::logic_error("hollow_out: core vertex removed");
        cores.push_back(static_cast<Vertex>(it - ids.begin()));
      }
  normalize_set(cores);
  auto ctc = completed_tube_complement(stripped, cores, fam.tube_k, s);
  HollowedSpace out;
  out.graph = std::move(ctc.graph);
  out.to_source.resize(out.graph.num_vertices(), -1);
  for (Vertex v = 0; v < out.graph.num_vertices(); ++v)
    if (ctc.to_ambient[v] != -1) out.to_source[v] = ids[ctc.to_ambient[v]];
  return out;
}

// ---------------------------------------------------------------------------
// Iterated unwrapping
// ---------------------------------------------------------------------------

struct DrillState {
  Graph graph;
  SeparatedFamily family;
  Vertex basepoint = 0;
};

struct DrillStepReport {
  Report separation;
  Report lifted_tubes;
  Report distances_no_decrease;  // lifted pairwise distances never shrink
  int lifted_members = 0;
  int dropped_members = 0;  // lifts clipped by the window
};

struct IteratedDrill {
  std::vector<DrillState> states;  // states[0] = input
  std::vector<DrillStepReport> steps;
  Report stabilization;
};

// Repeatedly unwraps scheduled tubes, lifting the remaining family and
// re-auditing separation; reports pointed stabilization of the basepoint
// ball between consecutive steps.
inline IteratedDrill iterate_unwrap(const DrillState& base, const std::vector<int>& schedule,
                                    int steps, int window, int s, int D, int depth_max,
                                    int stabilization_radius = 4) {
  if (steps > static_cast<int>(schedule.size()))
    throw std::invalid_argument("iterate_unwrap: schedule shorter than steps");
  IteratedDrill out;
  out.states.push_back(base);
  for (int step = 0; step < steps; ++step) {
    const DrillState& cur = out.states.back();
    int pick = schedule[step];
    if (pick < 0 || pick >= static_cast<int>(cur.family.members.size()) ||
        cur.family.members[pick].kind != FamilyMember::Kind::Tube)
      throw std::invalid_argument("iterate_unwrap: schedule entry is not a tube");
    const auto& tube = cur.family.members[pick];
    VertexSet core_set(tube.core.begin(), tube.core.end());
    normalize_set(core_set);

    UnwrappedSpace u = unwrap_and_glue(cur.graph, core_set, cur.family.tube_k, s, D, window,
                                       depth_max);
    DrillState next;
    next.graph = u.graph;
    next.family.chi = cur.family.chi;
    next.family.tube_k = cur.family.tube_k;
    // Basepoint: the fiber-0 preimage.
    Vertex base_ctc = u.base.ctc.from_ambient[cur.basepoint];
    if (base_ctc == -1)
      throw std::invalid_argument("iterate_unwrap: basepoint fell inside the drilled tube");
    next.basepoint = u.cover.cover_vertex(base_ctc, 0);

    DrillStepReport srep{Report("separated-family", Verdict::Inconclusive),
                         Report("lifted-tubes", Verdict::Pass),
                         Report("lift-distances", Verdict::Pass)};
    // Lift the remaining members fiber by fiber.
    for (std::size_t m = 0; m < cur.family.members.size(); ++m) {
      if (static_cast<int>(m) == pick) continue;
      const auto& member = cur.family.members[m];
      for (int f = -window; f <= window; ++f) {
        FamilyMember lift;
        lift.kind = member.kind;
        bool ok = true;
        for (Vertex v : member.vertices) {
          Vertex ctc_v = u.base.ctc.from_ambient[v];
          if (ctc_v == -1) { ok = false; break; }
          lift.vertices.push_back(u.cover.cover_vertex(ctc_v, f));
        }
        for (Vertex v : member.core) {
          Vertex ctc_v = u.base.ctc.from_ambient[v];
          if (ctc_v == -1) { ok = false; break; }
          lift.core.push_back(u.cover.cover_vertex(ctc_v, f));
        }
        // Window hygiene: lifts whose neighbourhood is clipped are dropped.
        if (ok && std::abs(f) < window) {
          normalize_set(lift.vertices);
          next.family.members.push_back(std::move(lift));
          ++srep.lifted_members;
        } else {
          ++srep.dropped_members;
        }
      }
    }
    // The freshly glued horoball joins the family.
    {
      FamilyMember horo;
      horo.kind = FamilyMember::Kind::Horoball;
      for (Vertex v = u.n_cover; v < u.graph.num_vertices(); ++v) horo.vertices.push_back(v);
      normalize_set(horo.vertices);
      next.family.members.push_back(std::move(horo));
    }

    // Pairwise distances between surviving lifts never fall below the
    // distances of their sources.
    {
      std::vector<std::pair<std::size_t, VertexSet>> sources;  // source index -> lift at fiber 0
      for (std::size_t m = 0; m < cur.family.members.size(); ++m) {
        if (static_cast<int>(m) == pick) continue;
        VertexSet lifted;
        bool ok = true;
        for (Vertex v : cur.family.members[m].vertices) {
          Vertex ctc_v = u.base.ctc.from_ambient[v];
          if (ctc_v == -1) { ok = false; break; }
          lifted.push_back(u.cover.cover_vertex(ctc_v, 0));
        }
        if (ok) {
          normalize_set(lifted);
          sources.emplace_back(m, std::move(lifted));
        }
      }
      for (std::size_t i = 0; i < sources.size() && !srep.distances_no_decrease.failed(); ++i) {
        DistanceField before(cur.graph, cur.family.members[sources[i].first].vertices);
        DistanceField after(next.graph, sources[i].second);
        for (std::size_t j = i + 1; j < sources.size(); ++j) {
          int db = -1, da = -1;
          for (Vertex v : cur.family.members[sources[j].first].vertices)
            if (before.reachable(v) && (db == -1 || before.at(v) < db)) db = before.at(v);
          for (Vertex v : sources[j].second)
            if (after.reachable(v) && (da == -1 || after.at(v) < da)) da = after.at(v);
          if (db != -1 && da != -1 && da < db) {
            srep.distances_no_decrease.verdict = Verdict::Fail;
            srep.distances_no_decrease.details["witness_pair"] = {
                static_cast<int>(sources[i].first), static_cast<int>(sources[j].first)};
            break;
          }
        }
      }
    }

    // Per-step audits: lifted tubes are tubes, and separation is preserved.
    for (const auto& member : next.family.members) {
      if (member.kind != FamilyMember::Kind::Tube) continue;
      VertexSet cset(member.core.begin(), member.core.end());
      normalize_set(cset);
      auto parts = sphere_and_tube(next.graph, cset, next.family.tube_k);
      if (parts.open_tube != member.vertices) {
        srep.lifted_tubes.verdict = Verdict::Fail;
        break;
      }
    }
    srep.separation = separated_family_audit(next.graph, next.family);
    if (srep.lifted_tubes.failed() || srep.separation.failed() ||
        srep.distances_no_decrease.failed())
      throw std::domain_error("iterate_unwrap: step " + std::to_string(step) +
                              " failed its audits: lifted_tubes=" +
                              to_string(srep.lifted_tubes.verdict) +
                              " separation=" + srep.separation.to_json().dump());
    out.steps.push_back(std::move(srep));
    out.states.push_back(std::move(next));
  }

  // Stabilization: the basepoint ball is pointed-isometric between the last
  // two steps.
  out.stabilization = Report("stabilization", Verdict::Inconclusive);
  if (out.states.size() >= 2) {
    const DrillState& a = out.states[out.states.size() - 2];
    const DrillState& b = out.states.back();
    PointedBall ba = ball_around(a.graph, a.basepoint, stabilization_radius);
    PointedBall bb = ball_around(b.graph, b.basepoint, stabilization_radius);
    Graph sa(ba.graph.num_vertices()), sb(bb.graph.num_vertices());
    for (auto [x, y] : ba.graph.edges()) sa.add_edge(x, y);
    for (auto [x, y] : bb.graph.edges()) sb.add_edge(x, y);
    auto iso = pointed_isomorphic(PointedBall{std::move(sa), ba.center, stabilization_radius},
                                  PointedBall{std::move(sb), bb.center, stabilization_radius});
    out.stabilization.verdict = iso.has_value() ? Verdict::Pass : Verdict::Fail;
    out.stabilization.details["radius"] = stabilization_radius;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constants ledger
// ---------------------------------------------------------------------------

struct LedgerInputs {
  Rat delta0 = 1;
  Rat lambda0 = 0;
  Rat l0 = 1;
  Rat a0 = 0;
  std::function<Rat(const Rat&)> phi;  // total on the needed arguments
  bool exact_profile = true;           // exact keeps the paper's floors
  Rat delta1_override = 0;             // surrogate hyperbolicity of the cusp
  Rat r_theorem = 0;                   // non-constructive radius input
  Rat sigma_zero_input = 0;            // non-constructive separation input
  unsigned bits = 64;                  // precision for the C0 evaluation
};

struct ConstantsLedger {
  Rat s0, delta1, delta2, q0, c0, d0, d1, sigma0, r0, sigma_zero, sigma_one, sigma;
  Pow2Scaled sys0;
  bool c0_rounded_up = true;
  bool sys0_exponent_rounded = false;
  std::string profile;

  json to_json() const {
    json j;
    auto put = [&](const char* name, const Rat& v) {
      j[name] = {{"num", rat_num(v).str()}, {"den", rat_den(v).str()}, {"approx", rat_double(v)}};
    };
    put("s0", s0);
    put("delta1", delta1);
    put("delta2", delta2);
    put("Q0", q0);
    put("C0", c0);
    put("D0", d0);
    put("D1", d1);
    put("sigma0", sigma0);
    put("R0", r0);
    put("Sigma0", sigma_zero);
    put("Sigma1", sigma_one);
    put("Sigma", sigma);
    j["sys0"] = {{"exponent", sys0.exponent.str()},
                 {"multiplier_num", rat_num(sys0.mult).str()},
                 {"multiplier_den", rat_den(sys0.mult).str()},
                 {"materialized", sys0.materialized.has_value()}};
    if (sys0.materialized) j["sys0"]["bits"] = boost::multiprecision::msb(*sys0.materialized) + 1;
    j["profile"] = profile;
    return j;
  }
};

// The full constant cascade in exact arithmetic.  C0 is evaluated from the
// delta0-adapted visual parameters and rounded up at the declared precision
// (recorded); everything downstream is exact from there.  sys0 is kept in
// exponent form and materialized when it fits.
inline ConstantsLedger constants_ledger(const LedgerInputs& in) {
  if (!in.phi) throw std::invalid_argument("constants_ledger: phi is required");
  ConstantsLedger led;
  led.profile = in.exact_profile ? "exact" : "surrogate";
  led.s0 = 8 * in.delta0;

  if (in.exact_profile)
    led.delta1 = rat_max(rat_max(in.delta0, 100), in.delta1_override);
  else
    led.delta1 = rat_max(in.delta0, in.delta1_override);
  led.delta2 = 1500 * led.delta1;
  led.q0 = rat_max(2 * in.phi(2 * led.delta2 + 1), led.delta2);

  {
    // C0 from the adapted parameters at delta0.
    Rat eps = Rat(1) / (6 * in.delta0);
    Interval e13 = exp_interval(Rat(1, 3), in.bits + 16);
    Interval kappa = reciprocal(Interval(Rat(3) - 2 * e13.hi, Rat(3) - 2 * e13.lo));
    Interval ln_k = Interval(ln_interval(kappa.lo, in.bits).lo, ln_interval(kappa.hi, in.bits).hi);
    Interval ln_l0 = ln_interval(in.l0, in.bits);
    Interval inner = (ln_k * Rat(2) + ln_l0) * (Rat(1) / eps) + Rat(29) * in.delta0;
    Interval c0 = inner * Rat(2) + Rat(20) * in.delta0;
    led.c0 = round_rat(c0.hi, 20, +1);
  }
  led.d0 = 3 * in.phi(led.c0) + 108 * in.delta0;
  led.d1 = rat_max(rat_max(led.d0, 2 * led.q0 + 2),
                   16 * in.delta0 + 16 * in.delta0 * in.phi(16 * in.delta0));
  led.sigma0 = rat_max(10000000 * led.delta1, 100000 * led.d1);

  Rat exp25 = 25 * led.sigma0;
  Int exponent;
  if (rat_den(exp25) == 1) {
    exponent = rat_num(exp25);
  } else {
    exponent = ceil_rat(exp25);
    led.sys0_exponent_rounded = true;
  }
  led.sys0 = Pow2Scaled::make(exponent, led.q0);

  led.r0 = rat_max(rat_max(in.r_theorem, in.lambda0 + 2 * led.delta2), 6 * led.sigma0);
  led.sigma_zero = in.exact_profile ? rat_max(Rat(1000000000) * led.delta1, in.sigma_zero_input)
                                    : in.sigma_zero_input;
  led.sigma_one = 20 * led.sigma_zero + 60 * led.sigma0 + 10 * led.r0 + 50 * led.delta2;
  led.sigma = led.sigma_one + 2 * led.r0;

  // Every derived identity is asserted before the ledger is returned.
  if (led.delta2 != 1500 * led.delta1) throw std::logic_error("ledger: delta2 identity");
  if (led.sigma0 != rat_max(10000000 * led.delta1, 100000 * led.d1))
    throw std::logic_error("ledger: sigma0 identity");
  if (led.sigma_one != 20 * led.sigma_zero + 60 * led.sigma0 + 10 * led.r0 + 50 * led.delta2)
    throw std::logic_error("ledger: sigma1 identity");
  if (led.sigma != led.sigma_one + 2 * led.r0) throw std::logic_error("ledger: sigma identity");
  if (led.sys0.mult != led.q0) throw std::logic_error("ledger: sys0 multiplier identity");
  if (led.sys0.materialized) {
    Int check = rat_num(led.q0);
    check <<= led.sys0.exponent.convert_to<unsigned long>();
    if (rat_den(led.q0) != 1 || check != *led.sys0.materialized)
      throw std::logic_error("ledger: sys0 materialization identity");
  }
  return led;
}

// ---------------------------------------------------------------------------
// Very Translating check
// ---------------------------------------------------------------------------

// For each nontrivial sampled deck power and each sampled point outside the
// glued horoball: d(x, n.x) >= 10^4 * theta.
inline Report very_translating_check(const UnwrappedSpace& u, const Rat& theta,
                                     const std::vector<int>& powers, const VertexSet& samples_in) {
  Report rep("very-translating", Verdict::Pass);
  VertexSet samples = samples_in;
  if (samples.empty()) {
    for (Vertex v = 0; v < u.n_cover; v += std::max(1, u.n_cover / 32)) samples.push_back(v);
    normalize_set(samples);
  }
  Rat threshold = 10000 * theta;
  int best = -1;
  json witness;
  for (int n : powers) {
    if (n == 0) continue;  // the identity is excluded by definition
    for (Vertex x : samples) {
      if (x >= u.n_cover) continue;  // outside the horoball only
      Vertex nx = u.deck(x, n);
      if (nx == -1) continue;
      DistanceField d(u.graph, x);
      if (!d.reachable(nx)) continue;
      int dist = d.at(nx);
      if (best == -1 || dist < best) {
        best = dist;
        witness = {{"power", n}, {"point", x}, {"distance", dist}};
      }
    }
  }
  rep.details["threshold"] = rat_double(threshold);
  rep.details["min_displacement"] = best;
  rep.details["witness"] = witness;
  if (best == -1)
    rep.verdict = Verdict::Inconclusive;
  else if (Rat(best) < threshold)
    rep.verdict = Verdict::Fail;
  return rep;
}

}  // namespace drill

#endif  // DRILL_DRILLING_HPP_
