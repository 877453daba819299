// Boundary samples at a finite horizon: delta-adapted visual parameters,
// bracketed visual distances, the fine-chain linear-connectedness
// estimator, spherical connectivity, basepoint rebasing, and the explicit
// constant formulas derived from visual metrics.
//
// Verdict-critical comparisons live in the exponent domain: deciding
// e^(-eps*a) <= c * e^(-eps*b) is deciding eps*(a-b) against log(c), which
// cmp_rat_vs_log settles conclusively for rational inputs.

#ifndef DRILL_BOUNDARY_HPP_
#define DRILL_BOUNDARY_HPP_

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "drill/graph.hpp"
#include "drill/hyperbolicity.hpp"
#include "drill/numeric.hpp"
#include "drill/report.hpp"

namespace drill {

struct AdaptedParams {
  Rat epsilon;      // 1/(6 delta)
  Interval kappa;   // (3 - 2 e^(1/3))^-1, bracketed at the requested precision
};

inline AdaptedParams adapted_params(const Rat& delta, unsigned bits = 96) {
  if (delta <= 0) throw std::invalid_argument("adapted_params: delta must be positive");
  AdaptedParams out;
  out.epsilon = Rat(1) / (6 * delta);
  Interval e13 = exp_interval(Rat(1, 3), bits + 16);
  Interval denom(Rat(3) - 2 * e13.hi, Rat(3) - 2 * e13.lo);
  if (denom.lo <= 0) throw std::logic_error("adapted kappa bracket failed");
  out.kappa = reciprocal(denom).rounded(bits);
  return out;
}

// ---------------------------------------------------------------------------
// Boundary samples
// ---------------------------------------------------------------------------

struct BoundarySample {
  Vertex basepoint = -1;
  VertexSet points;
  std::vector<std::vector<Rat>> gromov;  // (i|j)_w; diagonal holds d(p_i, w)
  Rat epsilon = 1;
  bool delta_adapted = false;
  Rat delta = 0;

  std::size_t size() const { return points.size(); }
};

inline BoundarySample boundary_sample(const Graph& g, Vertex basepoint, VertexSet points,
                                      const Rat& epsilon) {
  BoundarySample s;
  s.basepoint = basepoint;
  normalize_set(points);
  s.points = std::move(points);
  s.epsilon = epsilon;
  DistanceField dw(g, basepoint);
  std::vector<DistanceField> rows;
  rows.reserve(s.points.size());
  for (Vertex p : s.points) rows.emplace_back(g, p);
  s.gromov.assign(s.points.size(), std::vector<Rat>(s.points.size(), 0));
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    s.gromov[i][i] = dw.at(s.points[i]);
    for (std::size_t j = i + 1; j < s.points.size(); ++j) {
      Rat prod(dw.at(s.points[i]) + dw.at(s.points[j]) - rows[i].at(s.points[j]), 2);
      s.gromov[i][j] = s.gromov[j][i] = prod;
    }
  }
  return s;
}

inline BoundarySample boundary_sample_adapted(const Graph& g, Vertex basepoint, VertexSet points,
                                              const Rat& delta) {
  auto params = adapted_params(delta);
  BoundarySample s = boundary_sample(g, basepoint, std::move(points), params.epsilon);
  s.delta_adapted = true;
  s.delta = delta;
  return s;
}

struct VisualBracket {
  Interval representative;  // e^(-eps (i|j))
  Interval lower, upper;    // representative / kappa, representative * kappa
};

inline VisualBracket visual_distance(const BoundarySample& s, std::size_t i, std::size_t j,
                                     const Interval& kappa, unsigned bits = 96) {
  if (i == j) throw std::invalid_argument("visual_distance: indices must differ");
  VisualBracket out;
  out.representative = exp_interval(-s.epsilon * s.gromov[i][j], bits);
  out.lower = mul(out.representative, reciprocal(kappa)).rounded(bits);
  out.upper = mul(out.representative, kappa).rounded(bits);
  return out;
}

// ---------------------------------------------------------------------------
// Fine chains and linear connectedness
// ---------------------------------------------------------------------------

namespace boundary_detail {

// Decides rep(a) <= rep(b) / 2, i.e. eps*(t_a - t_b) >= ln 2.
inline bool half_step_ok(const Rat& eps, const Rat& t_edge, const Rat& t_pair) {
  return cmp_rat_vs_log(eps * (t_edge - t_pair), 1, 1) >= 0;
}

// Decides rep(a) <= L * rep(b), i.e. eps*(t_b - t_a) <= ln L.
inline bool within_factor(const Rat& eps, const Rat& t_a, const Rat& t_b, long factor) {
  return cmp_rat_vs_log(eps * (t_b - t_a), 0, Rat(factor)) <= 0;
}

}  // namespace boundary_detail

struct ChainVerdict {
  bool found = false;
  int linear_l = 0;          // minimal L <= l_max making every resolved pair chainable
  int l_max = 0;
  int conclusion_5l = 0;     // the 5L threshold the fine-chain lemma yields
  std::size_t pairs = 0;
  std::size_t unresolved_pairs = 0;  // below the sample's resolution: skipped
  std::pair<int, int> witness_pair{-1, -1};  // unchainable pair when !found

  json to_json() const {
    json j;
    j["found"] = found;
    if (found) {
      j["L"] = linear_l;
      j["conclusion_5L"] = conclusion_5l;
    } else {
      j["L"] = nullptr;
      j["witness_pair"] = {witness_pair.first, witness_pair.second};
    }
    j["L_max"] = l_max;
    j["pairs"] = pairs;
    j["unresolved_pairs"] = unresolved_pairs;
    return j;
  }
};

// Minimal integer L <= l_max such that every sample pair is joined by a fine
// chain: steps of at most half the pair's representative distance, all chain
// points within factor L of both endpoints, and the realized chain diameter
// within factor L.  Distances are the representative visual values.
inline ChainVerdict linear_connectedness_estimate(const BoundarySample& s, int l_max) {
  if (s.size() < 2) throw std::invalid_argument("linear_connectedness_estimate: need >= 2 points");
  ChainVerdict verdict;
  verdict.l_max = l_max;
  int n = static_cast<int>(s.size());
  // Step graphs depend on the pair only through the product value; cache one
  // adjacency structure per distinct value.
  std::map<Rat, std::vector<std::vector<int>>> step_cache;
  auto step_graph = [&](const Rat& t_pq) -> const std::vector<std::vector<int>>& {
    auto it = step_cache.find(t_pq);
    if (it != step_cache.end()) return it->second;
    std::vector<std::vector<int>> step(n);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (boundary_detail::half_step_ok(s.epsilon, s.gromov[a][b], t_pq)) {
          step[a].push_back(b);
          step[b].push_back(a);
        }
    return step_cache.emplace(t_pq, std::move(step)).first->second;
  };
  // Covering resolution of the sample in the representative metric:
  // rho_net = max over z of min over z' of rep(z,z'), encoded by the product
  // T* = min over z of max over z' of (z|z').  Pairs with rep(p,q) < 2*rho_net
  // sit below the sample's resolution: the half-step subdivision they need
  // cannot exist at this sampling density, so they are skipped and counted.
  Rat t_star;
  {
    bool first_z = true;
    for (int z = 0; z < n; ++z) {
      Rat best = 0;
      bool first = true;
      for (int zz = 0; zz < n; ++zz) {
        if (zz == z) continue;
        if (first || s.gromov[z][zz] > best) best = s.gromov[z][zz];
        first = false;
      }
      if (first_z || best < t_star) t_star = best;
      first_z = false;
    }
  }
  int overall = 1;
  for (int p = 0; p < n && overall <= l_max; ++p) {
    for (int q = p + 1; q < n; ++q) {
      ++verdict.pairs;
      const Rat& t_pq = s.gromov[p][q];
      // Two half-step levels of headroom below the covering resolution.
      if (cmp_rat_vs_log(s.epsilon * (t_star - t_pq), 2, 1) < 0) {
        ++verdict.unresolved_pairs;
        continue;
      }
      const auto& step = step_graph(t_pq);
      int minimal = -1;
      for (int l = 1; l <= l_max; ++l) {
        // Restrict to points within factor l of both endpoints.
        std::vector<char> allowed(n, 0);
        for (int z = 0; z < n; ++z) {
          bool near_p = z == p || boundary_detail::within_factor(s.epsilon, s.gromov[p][z], t_pq, l);
          bool near_q = z == q || boundary_detail::within_factor(s.epsilon, s.gromov[q][z], t_pq, l);
          allowed[z] = near_p && near_q;
        }
        if (!allowed[p] || !allowed[q]) continue;
        // BFS from p to q in the restricted step graph.
        std::vector<int> parent(n, -2);
        std::deque<int> queue{p};
        parent[p] = -1;
        while (!queue.empty()) {
          int u = queue.front();
          queue.pop_front();
          for (int v : step[u])
            if (allowed[v] && parent[v] == -2) {
              parent[v] = u;
              queue.push_back(v);
            }
        }
        if (parent[q] == -2) continue;
        // Realized chain diameter within factor l of the pair distance.
        std::vector<int> chain;
        for (int cur = q; cur != -1; cur = parent[cur]) chain.push_back(cur);
        bool diam_ok = true;
        for (std::size_t a = 0; a < chain.size() && diam_ok; ++a)
          for (std::size_t b = a + 1; b < chain.size() && diam_ok; ++b)
            if (chain[a] != chain[b] &&
                !boundary_detail::within_factor(s.epsilon, s.gromov[chain[a]][chain[b]], t_pq, l))
              diam_ok = false;
        if (diam_ok) {
          minimal = l;
          break;
        }
      }
      if (minimal == -1) {
        verdict.found = false;
        verdict.witness_pair = {p, q};
        return verdict;
      }
      overall = std::max(overall, minimal);
    }
  }
  verdict.found = overall <= l_max;
  verdict.linear_l = overall;
  verdict.conclusion_5l = 5 * overall;
  return verdict;
}

// ---------------------------------------------------------------------------
// Spherical connectivity
// ---------------------------------------------------------------------------

// For all sphere pairs p,q: a sphere sequence with consecutive Gromov
// products >= R - 5*delta whose members keep (p|p_i) >= (p|q) - Delta.
inline Report spherical_connectivity_check(const Graph& g, Vertex y, int R, const Rat& big_delta,
                                           const Rat& delta) {
  Report rep("spherical-connectivity", Verdict::Pass);
  DistanceField dy(g, y);
  VertexSet sphere;
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    if (dy.reachable(v) && dy.at(v) == R) sphere.push_back(v);
  rep.details["R"] = R;
  rep.details["sphere_size"] = sphere.size();
  if (sphere.empty()) throw std::invalid_argument("spherical_connectivity_check: empty sphere");

  int n = static_cast<int>(sphere.size());
  std::vector<std::vector<Rat>> prod(n, std::vector<Rat>(n, 0));
  for (int i = 0; i < n; ++i) {
    DistanceField di(g, sphere[i]);
    for (int j = 0; j < n; ++j) prod[i][j] = Rat(R) - Rat(di.at(sphere[j]), 2);
  }
  Rat step_floor = Rat(R) - 5 * delta;
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (prod[i][j] >= step_floor) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;  // constant sequence
      Rat floor_prod = prod[p][q] - big_delta;
      std::vector<char> seen(n, 0);
      std::deque<int> queue;
      if (prod[p][p] >= floor_prod) {
        queue.push_back(p);
        seen[p] = 1;
      }
      bool ok = false;
      while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (u == q) {
          ok = true;
          break;
        }
        for (int v : adj[u]) {
          if (seen[v]) continue;
          if (v != q && prod[p][v] < floor_prod) continue;
          seen[v] = 1;
          queue.push_back(v);
        }
      }
      if (!ok) {
        rep.verdict = Verdict::Fail;
        rep.details["witness_pair"] = {sphere[p], sphere[q]};
        return rep;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rebasing
// ---------------------------------------------------------------------------

// New basepoint at distance (x|y)_w along the canonical geodesic toward x
// (rounded down to a vertex).  Construction only; no asymptotic conclusions.
inline Vertex rebase(const Graph& g, Vertex w, Vertex x, Vertex y) {
  DistanceField dw(g, w);
  if (!dw.reachable(x) || !dw.reachable(y)) throw std::domain_error("rebase: unreachable points");
  DistanceField dx(g, x);
  Rat prod(dw.at(x) + dw.at(y) - dx.at(y), 2);
  long steps = floor_rat(prod).convert_to<long>();
  if (steps > dw.at(x)) throw std::domain_error("rebase: truncation too small for the ray");
  auto ray = canonical_geodesic(g, dw, w, x);
  return ray[static_cast<std::size_t>(steps)];
}

// ---------------------------------------------------------------------------
// Explicit constants from visual-metric arguments
// ---------------------------------------------------------------------------

struct BoundaryConstants {
  Interval delta0_big;   // log(2 kappa^2 L0)/eps + 20 delta0
  Interval c0;           // 2((2 log kappa + log L0)/eps + 29 delta0) + 20 delta0
  Interval delta_lemma;  // (1/eps) log(kappa^2 L0) + 5 delta0
};

inline Interval ln_of_interval(const Interval& x, unsigned bits) {
  Interval lo = ln_interval(x.lo, bits);
  Interval hi = ln_interval(x.hi, bits);
  return Interval(lo.lo, hi.hi);
}

inline BoundaryConstants section_constants(const Rat& delta0, const Rat& l0,
                                           const Interval& kappa, const Rat& eps,
                                           unsigned bits = 96) {
  if (delta0 <= 0 || l0 <= 0 || eps <= 0 || kappa.lo <= 0)
    throw std::invalid_argument("section_constants: inputs must be positive");
  BoundaryConstants out;
  Interval k2 = mul(kappa, kappa);
  Interval two_k2_l0 = (mul(k2, Interval(l0)) * Rat(2)).rounded(bits + 16);
  out.delta0_big = (ln_of_interval(two_k2_l0, bits) * (Rat(1) / eps) + Rat(20) * delta0).rounded(bits);
  Interval ln_k = ln_of_interval(kappa, bits);
  Interval ln_l0 = ln_of_interval(Interval(l0), bits);
  Interval inner = ((ln_k * Rat(2) + ln_l0) * (Rat(1) / eps) + Rat(29) * delta0).rounded(bits + 16);
  out.c0 = (inner * Rat(2) + Rat(20) * delta0).rounded(bits);
  out.delta_lemma =
      (ln_of_interval(mul(k2, Interval(l0)).rounded(bits + 16), bits) * (Rat(1) / eps) + Rat(5) * delta0)
          .rounded(bits);
  return out;
}

}  // namespace drill

#endif  // DRILL_BOUNDARY_HPP_
