// Gromov products, exact/sampled four-point delta, visibility checking,
// the guessing-geodesics certificate, and Coarse Cartan-Hadamard arithmetic.

#ifndef DRILL_HYPERBOLICITY_HPP_
#define DRILL_HYPERBOLICITY_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "drill/graph.hpp"
#include "drill/numeric.hpp"
#include "drill/parallel.hpp"
#include "drill/report.hpp"

namespace drill {

inline std::vector<std::vector<int>> all_pairs_distances(const Graph& g) {
  int n = g.num_vertices();
  std::vector<std::vector<int>> d(n);
  parallel_chunks(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t v = lo; v < hi; ++v) {
      DistanceField f(g, static_cast<Vertex>(v));
      d[v].resize(n);
      for (int u = 0; u < n; ++u) d[v][u] = f.at_or(u, -1);
    }
  });
  return d;
}

inline Rat gromov_product(const Graph& g, Vertex x, Vertex y, Vertex w) {
  DistanceField from_w(g, w);
  if (!from_w.reachable(x) || !from_w.reachable(y))
    throw std::domain_error("gromov_product: vertices in different components");
  DistanceField from_x(g, x);
  return Rat(from_w.at(x) + from_w.at(y) - from_x.at(y), 2);
}

struct DeltaEstimate {
  enum class Method { Exact4pt, Sampled4pt };
  Rat delta = 0;
  Method method = Method::Exact4pt;
  std::uint64_t samples = 0;  // quadruples inspected
  std::array<Vertex, 4> witness{0, 0, 0, 0};

  json to_json() const {
    json j;
    j["delta"] = rat_double(delta);
    j["delta_twice"] = (2 * delta).convert_to<long long>();
    j["method"] = method == Method::Exact4pt ? "exact-4pt" : "sampled-4pt";
    j["samples"] = samples;
    j["witness"] = witness;
    return j;
  }
};

struct DeltaPolicy {
  bool exact = true;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  static DeltaPolicy exact_policy() { return {true, 0, 0}; }
  static DeltaPolicy sampled(std::uint64_t n, std::uint64_t seed) { return {false, n, seed}; }
};

namespace hyp_detail {

// Four-point defect of a quadruple, doubled: L - M over the three pair sums.
inline int defect2(const std::vector<std::vector<int>>& d, int a, int b, int c, int e) {
  int s1 = d[a][b] + d[c][e];
  int s2 = d[a][c] + d[b][e];
  int s3 = d[a][e] + d[b][c];
  int big = std::max({s1, s2, s3});
  int mid = s1 + s2 + s3 - big - std::min({s1, s2, s3});
  return big - mid;
}

}  // namespace hyp_detail

// Max four-point defect: exact mode enumerates all unordered quadruples;
// sampled mode is a lower bound and flagged as such.
inline DeltaEstimate four_point_delta(const Graph& g, const DeltaPolicy& policy) {
  auto d = all_pairs_distances(g);
  int n = g.num_vertices();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (d[i][j] < 0) throw std::domain_error("four_point_delta: graph is disconnected");

  DeltaEstimate out;
  if (policy.exact) {
    out.method = DeltaEstimate::Method::Exact4pt;
    struct Best {
      int defect2 = -1;
      std::array<Vertex, 4> witness{0, 0, 0, 0};
      std::uint64_t count = 0;
    };
    std::vector<Best> slots(64);
    std::size_t used = parallel_chunks(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi, std::size_t slot) {
      Best best;
      for (std::size_t a = lo; a < hi; ++a)
        for (int b = static_cast<int>(a) + 1; b < n; ++b)
          for (int c = b + 1; c < n; ++c)
            for (int e = c + 1; e < n; ++e) {
              ++best.count;
              int def = hyp_detail::defect2(d, static_cast<int>(a), b, c, e);
              if (def > best.defect2) {
                best.defect2 = def;
                best.witness = {static_cast<Vertex>(a), b, c, e};
              }
            }
      slots[slot] = best;
    });
    Best total;
    total.defect2 = 0;
    for (std::size_t s = 0; s < used; ++s) {
      total.count += slots[s].count;
      if (slots[s].defect2 > total.defect2) {
        total.defect2 = slots[s].defect2;
        total.witness = slots[s].witness;
      }
    }
    out.delta = Rat(total.defect2, 2);
    out.witness = total.witness;
    out.samples = total.count;
  } else {
    out.method = DeltaEstimate::Method::Sampled4pt;
    std::mt19937_64 rng(policy.seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    int best = 0;
    for (std::uint64_t s = 0; s < policy.samples; ++s) {
      int a = pick(rng), b = pick(rng), c = pick(rng), e = pick(rng);
      if (a == b || a == c || a == e || b == c || b == e || c == e) continue;
      int def = hyp_detail::defect2(d, a, b, c, e);
      if (def > best) {
        best = def;
        out.witness = {a, b, c, e};
      }
    }
    out.delta = Rat(best, 2);
    out.samples = policy.samples;
  }
  return out;
}

// Exact four-point delta of the induced ball; the standard way this code
// measures a space's delta on a truncation.
inline Rat measured_delta_ball(const Graph& g, Vertex center, int radius) {
  PointedBall b = ball_around(g, center, radius);
  return four_point_delta(b.graph, DeltaPolicy::exact_policy()).delta;
}

// ---------------------------------------------------------------------------
// Visibility: for interior p,q with d(p,q) <= 100*nu there must be a
// geodesic [p,q'] of length >= 200*nu passing within nu of q.
// ---------------------------------------------------------------------------

inline Report visibility_check(const Graph& g, const Rat& nu, const VertexSet& interior) {
  Report rep("visibility-check", Verdict::Pass);
  rep.details["nu"] = rat_double(nu);
  if (interior.empty()) {
    rep.verdict = Verdict::Inconclusive;
    rep.details["reason"] = "empty interior";
    return rep;
  }
  auto d = all_pairs_distances(g);
  int n = g.num_vertices();
  Rat pair_cut = 100 * nu, extension = 200 * nu;
  for (Vertex p : interior) {
    for (Vertex q : interior) {
      if (d[p][q] < 0 || Rat(d[p][q]) > pair_cut) continue;
      bool ok = false;
      for (int m = 0; m < n && !ok; ++m) {
        if (d[q][m] < 0 || Rat(d[q][m]) > nu) continue;
        for (int qq = 0; qq < n; ++qq) {
          if (d[p][qq] < 0) continue;
          if (Rat(d[p][qq]) >= extension && d[p][m] + d[m][qq] == d[p][qq]) {
            ok = true;
            break;
          }
        }
      }
      if (!ok) {
        rep.verdict = Verdict::Fail;
        rep.details["witness"] = {p, q};
        return rep;
      }
    }
  }
  rep.details["interior_size"] = interior.size();
  return rep;
}

// ---------------------------------------------------------------------------
// Guessing geodesics
// ---------------------------------------------------------------------------

// Total family of connected subgraphs Path(x,y).
class PathFamily {
 public:
  explicit PathFamily(int n) : n_(n), index_(static_cast<std::size_t>(n) * n, -1) {}

  int num_vertices() const { return n_; }

  void set(Vertex x, Vertex y, std::vector<Vertex> path) {
    if (path.empty()) throw std::invalid_argument("empty path");
    index_[key(x, y)] = static_cast<int>(paths_.size());
    index_[key(y, x)] = static_cast<int>(paths_.size());
    paths_.push_back(std::move(path));
  }

  bool has(Vertex x, Vertex y) const { return index_[key(x, y)] >= 0; }

  const std::vector<Vertex>& at(Vertex x, Vertex y) const {
    int i = index_[key(x, y)];
    if (i < 0) throw std::out_of_range("path family: missing pair");
    return paths_[i];
  }

  // Family must be total and each member connected, containing endpoints.
  void validate(const Graph& g) const {
    for (Vertex x = 0; x < n_; ++x)
      for (Vertex y = x; y < n_; ++y) {
        const auto& path = at(x, y);
        VertexSet s(path.begin(), path.end());
        normalize_set(s);
        if (!set_contains(s, x) || !set_contains(s, y))
          throw std::logic_error("path family: member misses an endpoint");
        auto [sub, ids] = induced_subgraph(g, s);
        if (!is_connected(sub)) throw std::logic_error("path family: member not connected");
      }
  }

 private:
  std::size_t key(Vertex x, Vertex y) const {
    return static_cast<std::size_t>(x) * n_ + y;
  }
  int n_;
  std::vector<int> index_;
  std::vector<std::vector<Vertex>> paths_;
};

// Canonical geodesics: lexicographically least predecessor walk.
inline std::vector<Vertex> canonical_geodesic(const Graph& g, const DistanceField& from_x, Vertex x,
                                              Vertex y) {
  if (!from_x.reachable(y)) throw std::domain_error("canonical_geodesic: unreachable");
  std::vector<Vertex> rev{y};
  Vertex cur = y;
  while (cur != x) {
    Vertex next = -1;
    for (Vertex u : g.neighbors(cur))
      if (from_x.at_or(u, 1 << 29) == from_x.at(cur) - 1) {
        next = u;
        break;
      }
    cur = next;
    rev.push_back(cur);
  }
  return {rev.rbegin(), rev.rend()};
}

inline PathFamily geodesic_family(const Graph& g) {
  int n = g.num_vertices();
  PathFamily fam(n);
  for (Vertex x = 0; x < n; ++x) {
    DistanceField d(g, x);
    for (Vertex y = x; y < n; ++y) fam.set(x, y, canonical_geodesic(g, d, x, y));
  }
  return fam;
}

// Minimal positive integer m with 2h(6 + log2(m+2)) <= m, decided in exact
// integer arithmetic:  (m+2)^(2a) <= 2^(mb - 12a)  for h = a/b.
inline bool certificate_m_ok(const Rat& h, long m) {
  if (h == 0) return true;
  Int a = rat_num(h), b = rat_den(h);
  return le_pow2(Rat(m + 2), Int(m) * b - 12 * a, 2 * a);
}

inline long minimal_certificate_m(const Rat& h) {
  if (h < 0) throw std::invalid_argument("certificate h must be nonnegative");
  if (h == 0) return 1;  // degenerate convention, flagged by callers
  for (long m = 1;; ++m) {
    if (certificate_m_ok(h, m)) return m;
    if (m > 100000000L) throw std::runtime_error("certificate m scan overflow");
  }
}

struct Certificate {
  bool ok = false;
  Rat h = 0;
  long m = 0;
  Rat k = 0;
  bool degenerate_h = false;
  Rat cond1_max_defect = 0;   // max distance of a Path vertex from the union
  Rat cond2_max_diameter = 0;
  std::array<Vertex, 3> witness_triple{-1, -1, -1};
  Vertex witness_vertex = -1;

  json to_json() const {
    json j;
    j["ok"] = ok;
    j["h"] = rat_double(h);
    j["m"] = m;
    j["k"] = rat_double(k);
    j["k_num"] = rat_num(k).convert_to<long long>();
    j["k_den"] = rat_den(k).convert_to<long long>();
    j["degenerate_h"] = degenerate_h;
    j["cond1_max_defect"] = rat_double(cond1_max_defect);
    j["cond2_max_diameter"] = rat_double(cond2_max_diameter);
    if (!ok) {
      j["witness_triple"] = witness_triple;
      j["witness_vertex"] = witness_vertex;
    }
    return j;
  }
};

// Verifies the two guessing-geodesics conditions for the family at slack h;
// on success returns the minimal m and k = (3m - 10h)/2.
inline Certificate certify_guess_geodesics(const Graph& g, const PathFamily& fam, const Rat& h) {
  int n = g.num_vertices();
  if (fam.num_vertices() != n) throw std::invalid_argument("family/graph size mismatch");
  Certificate cert;
  cert.h = h;
  long hfloor = h >= 0 ? floor_rat(h).convert_to<long>() : -1;

  auto d = all_pairs_distances(g);

  // Condition (2): short pairs have small Path diameter.
  for (Vertex x = 0; x < n; ++x) {
    for (Vertex y : g.neighbors(x)) {
      if (y < x) continue;
      const auto& path = fam.at(x, y);
      int diam = 0;
      for (std::size_t i = 0; i < path.size(); ++i)
        for (std::size_t j = i + 1; j < path.size(); ++j)
          diam = std::max(diam, d[path[i]][path[j]]);
      cert.cond2_max_diameter = rat_max(cert.cond2_max_diameter, Rat(diam));
      if (Rat(diam) > h) {
        cert.ok = false;
        cert.witness_triple = {x, y, -1};
        return cert;
      }
    }
    // Degenerate pairs (x,x).
    const auto& pp = fam.at(x, x);
    for (std::size_t i = 0; i < pp.size(); ++i)
      for (std::size_t j = i + 1; j < pp.size(); ++j)
        if (Rat(d[pp[i]][pp[j]]) > h) {
          cert.ok = false;
          cert.witness_triple = {x, x, -1};
          return cert;
        }
  }

  // Condition (1): slim triples, checked with per-pair neighbourhood bitsets.
  std::size_t words = (static_cast<std::size_t>(n) + 63) / 64;
  std::vector<std::uint64_t> ball_bits(static_cast<std::size_t>(n) * words, 0);
  for (Vertex v = 0; v < n; ++v)
    for (Vertex u = 0; u < n; ++u)
      if (d[v][u] >= 0 && d[v][u] <= hfloor)
        ball_bits[static_cast<std::size_t>(v) * words + u / 64] |= (1ull << (u % 64));

  std::size_t pair_count = static_cast<std::size_t>(n) * (n + 1) / 2;
  std::vector<std::uint64_t> hood(pair_count * words, 0);
  auto pair_index = [&](Vertex x, Vertex y) {
    if (x > y) std::swap(x, y);
    std::size_t row = static_cast<std::size_t>(x) * n - static_cast<std::size_t>(x) * (x - 1) / 2;
    return row + static_cast<std::size_t>(y - x);
  };
  for (Vertex x = 0; x < n; ++x)
    for (Vertex y = x; y < n; ++y) {
      std::uint64_t* dst = &hood[pair_index(x, y) * words];
      for (Vertex v : fam.at(x, y)) {
        const std::uint64_t* src = &ball_bits[static_cast<std::size_t>(v) * words];
        for (std::size_t w = 0; w < words; ++w) dst[w] |= src[w];
      }
    }

  struct Fail {
    bool failed = false;
    std::array<Vertex, 3> triple{-1, -1, -1};
    Vertex vertex = -1;
  };
  std::vector<Fail> fails(64);
  std::vector<int> worst(64, 0);
  std::size_t used = parallel_chunks(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi, std::size_t slot) {
    for (std::size_t x = lo; x < hi && !fails[slot].failed; ++x)
      for (Vertex y = static_cast<Vertex>(x); y < n && !fails[slot].failed; ++y) {
        const auto& path = fam.at(static_cast<Vertex>(x), y);
        for (Vertex z = 0; z < n; ++z) {
          const std::uint64_t* b1 = &hood[pair_index(static_cast<Vertex>(x), z) * words];
          const std::uint64_t* b2 = &hood[pair_index(z, y) * words];
          for (Vertex v : path) {
            if ((b1[v / 64] | b2[v / 64]) & (1ull << (v % 64))) continue;
            // Defect: distance from v to the union exceeds floor(h).
            int best = 1 << 29;
            for (Vertex u : fam.at(static_cast<Vertex>(x), z))
              if (d[v][u] >= 0) best = std::min(best, d[v][u]);
            for (Vertex u : fam.at(z, y))
              if (d[v][u] >= 0) best = std::min(best, d[v][u]);
            worst[slot] = std::max(worst[slot], best);
            fails[slot].failed = true;
            fails[slot].triple = {static_cast<Vertex>(x), y, z};
            fails[slot].vertex = v;
            break;
          }
          if (fails[slot].failed) break;
        }
      }
  });
  for (std::size_t s = 0; s < used; ++s) {
    cert.cond1_max_defect = rat_max(cert.cond1_max_defect, Rat(worst[s]));
    if (fails[s].failed && !cert.ok) {
      cert.witness_triple = fails[s].triple;
      cert.witness_vertex = fails[s].vertex;
      cert.ok = false;
      return cert;
    }
  }

  cert.ok = true;
  if (h == 0) {
    cert.degenerate_h = true;
    cert.m = 1;
  } else {
    cert.m = minimal_certificate_m(h);
  }
  cert.k = (Rat(3 * cert.m) - 10 * h) / 2;
  return cert;
}

// Diagnostic from the "moreover" clause: Hausdorff distance between family
// members and canonical geodesics, measured (never asserted).
inline Rat path_geodesic_hausdorff(const Graph& g, const PathFamily& fam) {
  int n = g.num_vertices();
  auto d = all_pairs_distances(g);
  int worst = 0;
  for (Vertex x = 0; x < n; ++x) {
    DistanceField dx(g, x);
    for (Vertex y = x; y < n; ++y) {
      auto geo = canonical_geodesic(g, dx, x, y);
      const auto& path = fam.at(x, y);
      for (Vertex v : path) {
        int best = 1 << 29;
        for (Vertex u : geo) best = std::min(best, d[v][u]);
        worst = std::max(worst, best);
      }
      for (Vertex u : geo) {
        int best = 1 << 29;
        for (Vertex v : path) best = std::min(best, d[v][u]);
        worst = std::max(worst, best);
      }
    }
  }
  return Rat(worst);
}

// ---------------------------------------------------------------------------
// Coarse Cartan-Hadamard verdict (pure arithmetic; hypotheses recorded).
// ---------------------------------------------------------------------------

inline Report cch_verdict(const Rat& nu, const Rat& sigma, const Rat& simply_connected_scale) {
  if (nu < 0) throw std::invalid_argument("cch_verdict: nu must be nonnegative");
  Report rep("cch-verdict", Verdict::Pass);
  bool sigma_ok = sigma >= 10000000 * nu;
  bool scale_ok = simply_connected_scale * 100000 <= sigma;
  rep.details["nu"] = rat_double(nu);
  rep.details["sigma"] = rat_double(sigma);
  rep.details["scale"] = rat_double(simply_connected_scale);
  rep.details["sigma_ge_1e7_nu"] = sigma_ok;
  rep.details["scale_le_1e-5_sigma"] = scale_ok;
  rep.details["assumptions"] = {"balls of radius sigma are nu-hyperbolic",
                                "space is scale-simply-connected"};
  if (sigma_ok && scale_ok) {
    rep.verdict = Verdict::Pass;
    rep.details["hyperbolicity_bound"] = rat_double(300 * nu);
  } else {
    rep.verdict = Verdict::Fail;
  }
  return rep;
}

}  // namespace drill

#endif  // DRILL_HYPERBOLICITY_HPP_
