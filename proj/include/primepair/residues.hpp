#pragma once

// Local solution counting mod p for the polynomial families used by the
// pair constants: Legendre symbols, k-th power residue counts, combined
// pair counts, and the cubic residue classification of primes.

#include <cstdint>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <stdexcept>
#include <vector>

#include "primepair/primes.hpp"

namespace primepair {

// g(n) = n^k + q
struct OffsetPolynomial {
  unsigned k = 1;
  i64 q = 0;
};

// The pair {n, n^k + two_r}.
struct PairFamily {
  unsigned k = 1;
  i64 two_r = 0;
};

struct LocalData {
  u64 p = 0;
  u32 nu = 0;     // roots of n^k + q mod p
  u32 big_n = 0;  // roots of n (n^k + 2r) mod p
};

// How a prime p relates to cube extraction of a fixed q: for p = 3 or
// p = 2 mod 3 every residue has exactly one cube root (OnePrime); for
// p = 1 mod 3 a given q has either three cube roots or none.
enum class CubicClass { OnePrime, ZeroPrime, ThreePrime };

inline void validate(const OffsetPolynomial& g) {
  if (g.k < 1) throw std::invalid_argument("OffsetPolynomial: degree must be at least 1");
  if (g.q == 0) throw std::invalid_argument("OffsetPolynomial: offset must be nonzero");
}

inline void validate(const PairFamily& f) {
  if (f.k < 1) throw std::invalid_argument("PairFamily: degree must be at least 1");
  if (f.two_r == 0 || f.two_r % 2 != 0)
    throw std::invalid_argument("PairFamily: offset must be even and nonzero");
}

// ---------------------------------------------------------------------
// Legendre symbol (a/p) for odd prime p.

inline int legendre_symbol(i64 a, u64 p) {
  if (p < 3 || p % 2 == 0 || !detail::is_prime_u64(p))
    throw std::invalid_argument("legendre_symbol: p must be an odd prime");
  return detail::jacobi_i64_u128(a, p);
}

// ---------------------------------------------------------------------
// nu_count: #{1 <= n <= p : n^k + q = 0 mod p}.

inline u32 nu_count(const OffsetPolynomial& g, u64 p) {
  validate(g);
  i128 qm = i128(g.q) % i128(p);
  if (qm < 0) qm += p;
  // n^k = -q has the single root n = 0 when p | q, and n^k + q is
  // linear mod 2 for odd q
  if (qm == 0 || p == 2) return 1;
  if (g.k == 1) return 1;
  u64 neg_q = u64(i128(p) - qm);  // canonical residue of -q
  if (g.k == 2) return u32(1 + detail::jacobi_i64_u128(i64(neg_q), p));
  if (g.k == 3 && p % 3 == 2) return 1;
  // power residue criterion: with g = gcd(k, p-1), n^k = a is solvable
  // iff a^((p-1)/g) = 1, and then has exactly g solutions
  u64 gc = std::gcd(u64(g.k), p - 1);
  if (detail::pow_mod_u64(neg_q, (p - 1) / gc, p) == 1) return u32(gc);
  return 0;
}

inline u32 nu_count(unsigned k, i64 q, u64 p) { return nu_count(OffsetPolynomial{k, q}, p); }

// ---------------------------------------------------------------------
// big_n_count: #{1 <= n <= p : n (n^k + 2r) = 0 mod p}.  The root n = 0
// of the linear part is new unless p | 2r, in which case it already
// counts among the roots of n^k + 2r.

inline u32 big_n_count(const PairFamily& f, u64 p) {
  validate(f);
  u32 nu = nu_count(OffsetPolynomial{f.k, f.two_r}, p);
  bool divides = p <= u64(INT64_MAX) && f.two_r % i64(p) == 0;
  return divides ? nu : nu + 1;
}

inline u32 big_n_count(unsigned k, i64 two_r, u64 p) {
  return big_n_count(PairFamily{k, two_r}, p);
}

inline LocalData local_data(const PairFamily& f, u64 p) {
  return {p, nu_count(OffsetPolynomial{f.k, f.two_r}, p), big_n_count(f, p)};
}

// ---------------------------------------------------------------------
// Cubic classification.  Only primes p = 1 mod 3 split into zero-primes
// and three-primes; because (p-1)/3 is then even, q and -q classify
// identically.  Results are memoized since table generation revisits
// the same (q, p) pairs.

inline CubicClass cubic_classify(i64 q, u64 p) {
  if (q == 0) throw std::invalid_argument("cubic_classify: q must be nonzero");
  if (p % 3 != 1) throw std::invalid_argument("cubic_classify: p must be 1 mod 3");
  i128 qm = i128(q) % i128(p);
  if (qm < 0) qm += p;
  if (qm == 0) throw std::invalid_argument("cubic_classify: p must not divide q");

  static std::shared_mutex mutex;
  static std::map<std::pair<i64, u64>, CubicClass> memo;
  const std::pair<i64, u64> key{q, p};
  {
    std::shared_lock lock(mutex);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  CubicClass result = detail::pow_mod_u64(u64(qm), (p - 1) / 3, p) == 1
                          ? CubicClass::ThreePrime
                          : CubicClass::ZeroPrime;
  std::unique_lock lock(mutex);
  memo.emplace(key, result);
  return result;
}

// All primes p < bound with p = 1 mod 3, p not dividing q, for which q
// has three cube roots mod p.
inline std::vector<u64> three_primes_below(i64 q, u64 bound) {
  if (q == 0) throw std::invalid_argument("three_primes_below: q must be nonzero");
  std::vector<u64> out;
  if (bound < 8) return out;
  for_primes(bound - 1, [&](u64 p) {
    if (p % 3 != 1) return;
    if (p <= u64(INT64_MAX) && q % i64(p) == 0) return;
    if (cubic_classify(q, p) == CubicClass::ThreePrime) out.push_back(p);
  });
  return out;
}

}  // namespace primepair
