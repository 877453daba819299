// Combinatorial horoballs over a finite base graph, the exponential
// distortion audit, coarse simple connectivity, and the bounded-valence
// variant built from greedy nets.

#ifndef DRILL_HOROBALL_HPP_
#define DRILL_HOROBALL_HPP_

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include "drill/coarse_topology.hpp"
#include "drill/graph.hpp"
#include "drill/numeric.hpp"
#include "drill/report.hpp"

namespace drill {

struct Horoball {
  Graph total;
  int depth_max = 0;
  int base_size = 0;
  int base_diameter = 0;

  Vertex vertex_at(Vertex base_vertex, int depth) const {
    return depth * base_size + base_vertex;
  }
  Vertex base_of(Vertex v) const { return v % base_size; }
  int depth_of(Vertex v) const { return v / base_size; }

  // True when regular geodesics between depth-0 vertices cannot have been
  // shortened by the truncation.
  bool depth_sufficient() const {
    long long need = 0;
    while ((1ll << need) < base_diameter) ++need;
    return depth_max >= need + 2;
  }
};

// Vertices (v, n) for 0 <= n <= depth_max, vertical edges (v,n)-(v,n+1),
// horizontal edges (v,n)-(w,n) iff d_base(v,w) <= 2^n.
inline Horoball build_horoball(const Graph& base, int depth_max) {
  if (depth_max < 0) throw std::invalid_argument("build_horoball: negative depth");
  if (!is_connected(base)) throw std::invalid_argument("build_horoball: base not connected");
  Horoball h;
  h.base_size = base.num_vertices();
  h.depth_max = depth_max;
  h.total = Graph(h.base_size * (depth_max + 1));

  auto d = all_pairs_distances(base);
  for (int v = 0; v < h.base_size; ++v)
    for (int w = 0; w < h.base_size; ++w) h.base_diameter = std::max(h.base_diameter, d[v][w]);

  for (int n = 0; n <= depth_max; ++n) {
    long long reach = n >= 40 ? (1ll << 40) : (1ll << n);
    for (int v = 0; v < h.base_size; ++v) {
      if (n < depth_max) h.total.add_edge(h.vertex_at(v, n), h.vertex_at(v, n + 1));
      for (int w = v + 1; w < h.base_size; ++w)
        if (d[v][w] <= reach) h.total.add_edge(h.vertex_at(v, n), h.vertex_at(w, n));
    }
  }
  for (Vertex v = 0; v < h.total.num_vertices(); ++v)
    h.total.set_label(v, "horoball:" + std::to_string(h.depth_of(v)));
  return h;
}

// Both strict inequalities of the distortion law, for every distinct pair of
// depth-0 vertices:  d_H/2 - 2 < log2(d_base) < d_H/2 + 1, decided in
// integer arithmetic as  2^(d_H - 4) < d^2  and  d^2 < 2^(d_H + 2).
inline Report distortion_audit(const Horoball& h) {
  Report rep("horoball-distortion", Verdict::Pass);
  rep.details["depth_max"] = h.depth_max;
  rep.details["base_diameter"] = h.base_diameter;
  if (!h.depth_sufficient()) {
    rep.verdict = Verdict::Inconclusive;
    rep.details["reason"] = "depth_max below log2(diam)+2: geodesics may be truncated";
    return rep;
  }
  std::uint64_t pairs = 0;
  for (int v = 0; v < h.base_size; ++v) {
    DistanceField dh(h.total, h.vertex_at(v, 0));
    // Base distances: the depth-0 layer of the horoball carries exactly the
    // base edges, so BFS restricted to depth 0 recovers d_base.
    std::vector<int> dbase_row(h.base_size, -1);
    {
      std::deque<int> queue{v};
      dbase_row[v] = 0;
      while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (Vertex nb : h.total.neighbors(h.vertex_at(u, 0))) {
          if (h.depth_of(nb) != 0) continue;
          int b = h.base_of(nb);
          if (dbase_row[b] == -1) {
            dbase_row[b] = dbase_row[u] + 1;
            queue.push_back(b);
          }
        }
      }
    }
    for (int w = 0; w < h.base_size; ++w) {
      if (w == v) continue;
      ++pairs;
      int dH = dh.at(h.vertex_at(w, 0));
      int dbase = dbase_row[w];
      Int d2 = Int(dbase) * dbase;
      bool left_ok = dH - 4 < 0 || Int(1) << (dH - 4) < d2;
      bool right_ok = d2 < Int(1) << (dH + 2);
      if (!left_ok || !right_ok) {
        rep.verdict = Verdict::Fail;
        rep.details["witness"] = {v, w};
        rep.details["d_base"] = dbase;
        rep.details["d_horoball"] = dH;
        return rep;
      }
      // Proof clause: short base distances are undistorted.
      if (dbase < 6 && dH != dbase) {
        rep.verdict = Verdict::Fail;
        rep.details["witness"] = {v, w};
        rep.details["clause"] = "d<6 implies equality";
        return rep;
      }
    }
  }
  rep.details["pairs_checked"] = pairs;
  return rep;
}

inline Report horoball_csc_audit(const Horoball& h, int D) {
  if (D < 5) throw std::invalid_argument("horoball_csc_audit: the expected regime is D >= 5");
  Report rep = csc_check(h.total, D);
  rep.kind = "horoball-csc";
  rep.details["depth_max"] = h.depth_max;
  return rep;
}

// ---------------------------------------------------------------------------
// Bounded-valence horoball from greedy nets
// ---------------------------------------------------------------------------

struct BVHoroball {
  Graph total;
  std::vector<std::vector<Vertex>> nets;  // base vertices per depth
  std::vector<Vertex> net_vertex_id;      // flat id per (depth, index)
  int depth_max = 0;

  Report audit;  // valence/net/Lipschitz measurements
};

inline BVHoroball build_bv_horoball(const Graph& base, int depth_max, std::uint64_t net_seed) {
  if (!is_connected(base)) throw std::invalid_argument("build_bv_horoball: base not connected");
  BVHoroball bv;
  bv.depth_max = depth_max;
  auto d = all_pairs_distances(base);
  int n = base.num_vertices();

  // Greedy maximal separated nets; V_0 is everything.  The seed permutes
  // candidate order so net choices are reproducible but not id-biased.
  std::mt19937_64 rng(net_seed);
  for (int level = 0; level <= depth_max; ++level) {
    std::vector<Vertex> candidates(n);
    for (int v = 0; v < n; ++v) candidates[v] = v;
    if (level > 0) std::shuffle(candidates.begin(), candidates.end(), rng);
    long long sep = level == 0 ? 1 : (1ll << (level - 1));
    std::vector<Vertex> net;
    for (Vertex c : candidates) {
      bool ok = true;
      for (Vertex chosen : net)
        if (d[c][chosen] < sep) {
          ok = false;
          break;
        }
      if (ok) net.push_back(c);
    }
    std::sort(net.begin(), net.end());
    bv.nets.push_back(std::move(net));
  }

  // Net invariants: separation and covering.
  for (int level = 1; level <= depth_max; ++level) {
    long long sep = 1ll << (level - 1);
    const auto& net = bv.nets[level];
    for (std::size_t i = 0; i < net.size(); ++i)
      for (std::size_t j = i + 1; j < net.size(); ++j)
        if (d[net[i]][net[j]] < sep) throw std::logic_error("bv net separation violated");
    for (Vertex x = 0; x < n; ++x) {
      bool covered = false;
      for (Vertex v : net)
        if (d[x][v] < sep) {
          covered = true;
          break;
        }
      if (!covered) throw std::logic_error("bv net covering violated");
    }
  }

  int flat = 0;
  std::vector<std::vector<Vertex>> flat_id(depth_max + 1);
  for (int level = 0; level <= depth_max; ++level) {
    flat_id[level].resize(bv.nets[level].size());
    for (std::size_t i = 0; i < bv.nets[level].size(); ++i) flat_id[level][i] = flat++;
  }
  bv.total = Graph(flat);
  for (int level = 0; level <= depth_max; ++level) {
    long long reach = 1ll << std::min(level + 1, 40);
    const auto& net = bv.nets[level];
    for (std::size_t i = 0; i < net.size(); ++i) {
      for (std::size_t j = i + 1; j < net.size(); ++j)
        if (d[net[i]][net[j]] < reach)
          bv.total.add_edge(flat_id[level][i], flat_id[level][j]);
      if (level < depth_max)
        for (std::size_t j = 0; j < bv.nets[level + 1].size(); ++j)
          if (d[net[i]][bv.nets[level + 1][j]] < reach)
            bv.total.add_edge(flat_id[level][i], flat_id[level + 1][j]);
    }
  }

  // Companion horoball and the comparison maps phi, psi.
  Horoball h = build_horoball(base, depth_max);
  Report audit("bv-horoball-audit", Verdict::Pass);
  auto dist_h = all_pairs_distances(h.total);
  auto dist_bv = all_pairs_distances(bv.total);

  auto phi = [&](int level, std::size_t i) { return h.vertex_at(bv.nets[level][i], level); };
  auto psi = [&](Vertex base_v, int level) -> Vertex {
    const auto& net = bv.nets[level];
    Vertex best = net[0];
    for (Vertex cand : net)
      if (d[base_v][cand] < d[base_v][best]) best = cand;
    std::size_t idx = std::lower_bound(net.begin(), net.end(), best) - net.begin();
    return flat_id[level][idx];
  };

  int phi_lip = 0, psi_lip = 0, round_trip = 0;
  for (auto [u, v] : bv.total.edges()) {
    // Decode levels/indices.
    auto decode = [&](Vertex x) {
      for (int level = 0; level <= depth_max; ++level) {
        auto it = std::lower_bound(flat_id[level].begin(), flat_id[level].end(), x);
        if (it != flat_id[level].end() && *it == x)
          return std::pair<int, std::size_t>(level, it - flat_id[level].begin());
      }
      throw std::logic_error("bv decode failed");
    };
    auto [lu, iu] = decode(u);
    auto [lv, iv] = decode(v);
    phi_lip = std::max(phi_lip, dist_h[phi(lu, iu)][phi(lv, iv)]);
  }
  for (auto [u, v] : h.total.edges()) {
    Vertex pu = psi(h.base_of(u), h.depth_of(u));
    Vertex pv = psi(h.base_of(v), h.depth_of(v));
    psi_lip = std::max(psi_lip, dist_bv[pu][pv]);
  }
  for (Vertex x = 0; x < h.total.num_vertices(); ++x) {
    Vertex net_flat = psi(h.base_of(x), h.depth_of(x));
    // phi of that net point.
    int level = h.depth_of(x);
    const auto& net = bv.nets[level];
    std::size_t idx = 0;
    for (; idx < net.size(); ++idx)
      if (flat_id[level][idx] == net_flat) break;
    round_trip = std::max(round_trip, dist_h[x][phi(level, idx)]);
  }
  audit.details["phi_lipschitz"] = phi_lip;
  audit.details["psi_lipschitz"] = psi_lip;
  audit.details["phi_psi_displacement"] = round_trip;
  if (phi_lip > 2 || psi_lip > 6 || round_trip > 1) audit.verdict = Verdict::Fail;

  // Valence report, with the volume-counting bound per net vertex.
  int max_valence = 0;
  for (Vertex v = 0; v < bv.total.num_vertices(); ++v)
    max_valence = std::max(max_valence, bv.total.degree(v));
  audit.details["max_valence"] = max_valence;
  auto vol = [&](Vertex v, long long r) {
    int c = 0;
    for (int w = 0; w < n; ++w)
      if (d[v][w] <= r) ++c;
    return c;
  };
  bool vol_bound_ok = true;
  for (int level = 1; level <= depth_max && vol_bound_ok; ++level) {
    // Open balls of radius 2^(level-2) around 2^(level-1)-separated net
    // points are disjoint; membership test doubled to stay in integers.
    long long small2 = 1ll << std::min(level - 1, 40);  // 2 * 2^(level-2)
    long long big = 1ll << std::min(level + 2, 40);
    auto vol_open_small = [&](int center) {
      int c = 0;
      for (int w = 0; w < n; ++w)
        if (2ll * d[center][w] < small2) ++c;
      return c;
    };
    int min_small = n;
    for (int w = 0; w < n; ++w) min_small = std::min(min_small, vol_open_small(w));
    const auto& net = bv.nets[level];
    for (std::size_t i = 0; i < net.size(); ++i) {
      int horiz = 0;
      for (std::size_t j = 0; j < net.size(); ++j)
        if (i != j && d[net[i]][net[j]] < (1ll << std::min(level + 1, 40))) ++horiz;
      if (static_cast<long long>(horiz) * min_small > vol(net[i], big)) {
        vol_bound_ok = false;
        break;
      }
    }
  }
  audit.details["volume_valence_bound"] = vol_bound_ok;
  if (!vol_bound_ok) audit.verdict = Verdict::Fail;
  bv.audit = std::move(audit);
  return bv;
}

}  // namespace drill

#endif  // DRILL_HOROBALL_HPP_
