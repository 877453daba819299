// Exact arithmetic kernel: big integers, rationals, directed-rounding
// brackets for exp/log, and power-of-two comparisons used by certificates.

#ifndef DRILL_NUMERIC_HPP_
#define DRILL_NUMERIC_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace drill {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int rat_num(const Rat& r) { return boost::multiprecision::numerator(r); }
inline Int rat_den(const Rat& r) { return boost::multiprecision::denominator(r); }

inline Int floor_rat(const Rat& r) {
  Int n = rat_num(r), d = rat_den(r);
  Int q = n / d;
  if (n % d != 0 && n < 0) --q;
  return q;
}

inline Int ceil_rat(const Rat& r) {
  Int n = rat_num(r), d = rat_den(r);
  Int q = n / d;
  if (n % d != 0 && n > 0) ++q;
  return q;
}

inline double rat_double(const Rat& r) { return static_cast<double>(r); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline Rat rat_max(const Rat& a, const Rat& b) { return a < b ? b : a; }
inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }

// Outward rounding to denominator 2^bits.  dir < 0 rounds down, dir > 0 up.
inline Rat round_rat(const Rat& r, unsigned bits, int dir) {
  Int scale = Int(1) << bits;
  Rat s = r * scale;
  Int v = dir < 0 ? floor_rat(s) : ceil_rat(s);
  return Rat(v, scale);
}

// Closed rational interval.  Invariant lo <= hi.
struct Interval {
  Rat lo, hi;

  Interval() : lo(0), hi(0) {}
  Interval(Rat point) : lo(point), hi(point) {}
  Interval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo > hi) throw std::logic_error("interval endpoints out of order");
  }

  Rat width() const { return hi - lo; }
  Rat mid() const { return (lo + hi) / 2; }
  bool contains(const Rat& x) const { return lo <= x && x <= hi; }

  Interval operator+(const Interval& o) const { return Interval(lo + o.lo, hi + o.hi); }
  Interval operator-(const Interval& o) const { return Interval(lo - o.hi, hi - o.lo); }
  Interval operator*(const Rat& c) const {
    return c >= 0 ? Interval(lo * c, hi * c) : Interval(hi * c, lo * c);
  }
  Interval operator+(const Rat& c) const { return Interval(lo + c, hi + c); }

  Interval rounded(unsigned bits) const {
    return Interval(round_rat(lo, bits, -1), round_rat(hi, bits, +1));
  }
};

inline Interval mul(const Interval& a, const Interval& b) {
  // All our uses are positive, but keep it general.
  Rat c1 = a.lo * b.lo, c2 = a.lo * b.hi, c3 = a.hi * b.lo, c4 = a.hi * b.hi;
  return Interval(rat_min(rat_min(c1, c2), rat_min(c3, c4)),
                  rat_max(rat_max(c1, c2), rat_max(c3, c4)));
}

inline Interval reciprocal(const Interval& a) {
  if (a.lo <= 0) throw std::domain_error("reciprocal of interval touching zero");
  return Interval(Rat(1) / a.hi, Rat(1) / a.lo);
}

namespace detail {

// e^q for |q| <= 1/2 by Taylor series with explicit tail bound.
inline Interval exp_small(const Rat& q, unsigned terms) {
  Rat sum = 1;
  Rat term = 1;
  for (unsigned k = 1; k <= terms; ++k) {
    term = term * q / k;
    sum += term;
  }
  // |tail| <= |q|^(terms+1)/(terms+1)! * 1/(1-|q|) <= 2*|next term|.
  Rat next = rat_abs(term) * rat_abs(q) / Rat(terms + 1);
  Rat tail = next * 2;
  return Interval(sum - tail, sum + tail);
}

}  // namespace detail

// Rigorous bracket of e^q, q rational.  bits controls rounding precision.
inline Interval exp_interval(const Rat& q, unsigned bits = 96) {
  // Halve the argument until |q| <= 1/2, then square back up.
  unsigned halvings = 0;
  Rat r = q;
  while (rat_abs(r) > Rat(1, 2)) {
    r /= 2;
    ++halvings;
    if (halvings > 64) throw std::domain_error("exp argument too large");
  }
  unsigned terms = std::max<unsigned>(8, bits / 3);
  Interval v = detail::exp_small(r, terms);
  for (unsigned i = 0; i < halvings; ++i) {
    v = mul(v, v).rounded(bits + 16);
  }
  return v.rounded(bits);
}

namespace detail {

// 2*atanh(z) = ln((1+z)/(1-z)) for |z| < 1, with tail bound.
inline Interval two_atanh(const Rat& z, unsigned terms) {
  Rat z2 = z * z;
  Rat sum = 0;
  Rat pow = z;
  for (unsigned k = 0; k < terms; ++k) {
    sum += pow / Rat(2 * k + 1);
    pow *= z2;
  }
  // tail <= z^(2N+1)/(2N+1) * 1/(1-z^2)
  Rat tail = rat_abs(pow) / Rat(2 * terms + 1) / (Rat(1) - z2);
  Rat lo = 2 * (sum - tail), hi = 2 * (sum + tail);
  return Interval(lo, hi);
}

}  // namespace detail

inline Interval ln2_interval(unsigned bits = 96) {
  thread_local std::map<unsigned, Interval> cache;
  auto it = cache.find(bits);
  if (it != cache.end()) return it->second;
  unsigned terms = std::max<unsigned>(8, bits / 3);
  Interval v = detail::two_atanh(Rat(1, 3), terms).rounded(bits);
  cache[bits] = v;
  return v;
}

// Rigorous bracket of ln(x) for rational x > 0.
inline Interval ln_interval(const Rat& x, unsigned bits = 96) {
  if (x <= 0) throw std::domain_error("ln of non-positive rational");
  thread_local std::map<std::pair<long long, unsigned>, Interval> cache;
  bool cacheable = rat_den(x) == 1 && rat_num(x) <= 1 << 20;
  std::pair<long long, unsigned> key{cacheable ? rat_num(x).convert_to<long long>() : 0, bits};
  if (cacheable) {
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  long e = 0;
  Rat m = x;
  while (m >= 2) { m /= 2; ++e; }
  while (m < 1) { m *= 2; --e; }
  unsigned terms = std::max<unsigned>(8, bits / 3);
  Interval lm = detail::two_atanh(Rat(m - 1) / Rat(m + 1), terms);
  Interval l2 = ln2_interval(bits + 16);
  Interval v = (lm + l2 * Rat(e)).rounded(bits);
  if (cacheable) cache[key] = v;
  return v;
}

// Exact decision of  r <= 2^(p/q)  for rational r > 0 and integers p, q > 0.
inline bool le_pow2(const Rat& r, const Int& p, const Int& q) {
  if (q <= 0) throw std::invalid_argument("le_pow2: q must be positive");
  if (r <= 0) return true;
  // r^q <= 2^p  <=>  num^q <= 2^p * den^q          (p >= 0)
  //           <=>  num^q * 2^(-p) <= den^q         (p < 0)
  Int num = rat_num(r), den = rat_den(r);
  unsigned long qe = q.convert_to<unsigned long>();
  Int lhs = boost::multiprecision::pow(num, qe);
  Int rhs = boost::multiprecision::pow(den, qe);
  if (p >= 0) {
    rhs <<= p.convert_to<unsigned long>();
  } else {
    lhs <<= (-p).convert_to<unsigned long>();
  }
  return lhs <= rhs;
}

// Exact strict decision of  log2(r) < b  and  b < log2(r)  for rational r > 0.
inline bool log2_lt(const Rat& r, const Rat& b) {
  // log2(r) < b  <=>  r < 2^b  <=>  !(2^b <= r)
  if (r <= 0) return true;
  Rat inv = Rat(rat_den(r), rat_num(r));
  // 2^b <= r  <=>  1/r <= 2^(-b)
  return !le_pow2(inv, -rat_num(b), rat_den(b));
}
inline bool lt_log2(const Rat& b, const Rat& r) {
  if (r <= 0) return false;
  // b < log2(r)  <=>  2^b < r  <=>  !(r <= 2^b)
  return !le_pow2(r, rat_num(b), rat_den(b));
}
inline bool log2_le(const Rat& r, const Rat& b) {
  if (r <= 0) return true;
  return le_pow2(r, rat_num(b), rat_den(b));
}

// Conclusive three-way comparison of a rational c against k*ln(2) + ln(m),
// m rational > 0, k integer.  Returns -1, 0, +1 for c <, ==, > the target.
// Equality only occurs in the exactly-representable case k == 0, m == 1.
inline int cmp_rat_vs_log(const Rat& c, long k, const Rat& m,
                          unsigned max_bits = 512) {
  if (k == 0 && m == 1) {
    if (c == 0) return 0;
    return c < 0 ? -1 : 1;
  }
  for (unsigned bits = 64; bits <= max_bits; bits *= 2) {
    Interval t = ln2_interval(bits) * Rat(k);
    if (m != 1) t = t + ln_interval(m, bits);
    if (c < t.lo) return -1;
    if (c > t.hi) return 1;
  }
  throw std::runtime_error("cmp_rat_vs_log: comparison did not separate");
}

// 2^exponent * mult with optional materialization; used for systole-style
// constants whose exact value can exceed what is sensible to materialize.
struct Pow2Scaled {
  Int exponent;
  Rat mult = 1;
  std::optional<Int> materialized;

  static constexpr std::uint64_t kMaterializeBitCap = 1ull << 27;

  static Pow2Scaled make(Int exponent, Rat mult) {
    Pow2Scaled p;
    p.exponent = std::move(exponent);
    p.mult = std::move(mult);
    if (p.exponent >= 0 && p.exponent <= kMaterializeBitCap &&
        rat_den(p.mult) == 1) {
      Int v = rat_num(p.mult);
      v <<= p.exponent.convert_to<unsigned long>();
      p.materialized = v;
    }
    return p;
  }

  bool operator==(const Pow2Scaled& o) const {
    return exponent == o.exponent && mult == o.mult;
  }
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace drill

#endif  // DRILL_NUMERIC_HPP_
