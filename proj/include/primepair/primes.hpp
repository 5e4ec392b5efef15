#pragma once

// Prime generation and primality testing.
//
// The sieve is a segmented sieve of Eratosthenes over odd numbers; the
// segment size is configurable and defaults to 256 KiB so the working
// set stays inside L2.  Primality of 64-bit values uses Miller-Rabin
// with a fixed witness set that is known to be exact for every n < 2^64.
// Larger values (up to the signed 128-bit maximum) fall back to a
// Baillie-style combination (strong base-2 test plus a strong Lucas
// test); no counterexample to that combination is known, but it is not
// proven exact, which is what PrimalityResult::deterministic reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "primepair/detail/accumulate.hpp"

namespace primepair {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// ---------------------------------------------------------------------
// WideInt: checked 128-bit signed values for p^k + 2r.

struct WideInt {
  i128 value = 0;

  WideInt() = default;
  WideInt(i128 v) : value(v) {}

  // base^exp, throwing if the result leaves the signed 128-bit range.
  static WideInt pow(i64 base, unsigned exp) {
    i128 acc = 1;
    i128 b = base;
    for (unsigned i = 0; i < exp; ++i) {
      if (__builtin_mul_overflow(acc, b, &acc))
        throw std::overflow_error("WideInt::pow: result exceeds 128-bit range");
    }
    return WideInt(acc);
  }

  WideInt plus(i64 offset) const {
    i128 out;
    if (__builtin_add_overflow(value, (i128)offset, &out))
      throw std::overflow_error("WideInt::plus: result exceeds 128-bit range");
    return WideInt(out);
  }

  friend bool operator==(const WideInt& a, const WideInt& b) { return a.value == b.value; }
  friend auto operator<=>(const WideInt& a, const WideInt& b) { return a.value <=> b.value; }
};

inline std::string to_string(WideInt w) {
  i128 v = w.value;
  if (v == 0) return "0";
  bool neg = v < 0;
  // Magnitude as unsigned so the most negative value needs no special case.
  u128 m = neg ? u128(0) - u128(v) : u128(v);
  char buf[48];
  int pos = 48;
  while (m > 0) {
    buf[--pos] = char('0' + int(m % 10));
    m /= 10;
  }
  if (neg) buf[--pos] = '-';
  return std::string(buf + pos, buf + 48);
}

// ---------------------------------------------------------------------
// Modular arithmetic helpers.

namespace detail {

inline u64 mulmod_u64(u64 a, u64 b, u64 m) { return u64(u128(a) * b % m); }

inline u64 pow_mod_u64(u64 a, u64 e, u64 m) {
  if (m == 1) return 0;
  u64 r = 1;
  a %= m;
  while (e > 0) {
    if (e & 1) r = mulmod_u64(r, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return r;
}

// Shift-and-add multiplication for moduli above 64 bits.  Operands must
// already be reduced mod m; m < 2^127 keeps every intermediate in range.
inline u128 mulmod_u128(u128 a, u128 b, u128 m) {
  u128 r = 0;
  a %= m;
  while (b > 0) {
    if (b & 1) {
      r += a;
      if (r >= m) r -= m;
    }
    a += a;
    if (a >= m) a -= m;
    b >>= 1;
  }
  return r;
}

inline u128 pow_mod_u128(u128 a, u128 e, u128 m) {
  if (m == 1) return 0;
  u128 r = 1;
  a %= m;
  while (e > 0) {
    if (e & 1) r = mulmod_u128(r, a, m);
    a = mulmod_u128(a, a, m);
    e >>= 1;
  }
  return r;
}

constexpr u32 kTrialPrimes[] = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
    53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};

// Strong pseudoprime test.  n odd, n > 2, a already reduced (may be 0).
inline bool strong_probable_prime_u64(u64 n, u64 a) {
  if (a == 0) return true;
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  u64 x = pow_mod_u64(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < s; ++i) {
    x = mulmod_u64(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

inline bool miller_rabin_u64(u64 n) {
  // Witness set exact for all n < 3,317,044,064,679,887,385,961,981,
  // which covers the full 64-bit range.
  constexpr u64 kWitnesses[] = {2, 325, 9375, 28178, 450775, 9780504, 1795265022};
  for (u64 a : kWitnesses)
    if (!strong_probable_prime_u64(n, a % n)) return false;
  return true;
}

inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u32 p : kTrialPrimes) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  if (n < u64(127) * 127) return true;
  return miller_rabin_u64(n);
}

// Jacobi symbol (a/n) for odd n >= 1 and |a| small enough for i64.
inline int jacobi_i64_u128(i64 a, u128 n) {
  u128 aa;
  int t = 1;
  if (a < 0) {
    aa = u128(-(i128)a) % n;
    if (n % 4 == 3) t = -t;  // (-1/n)
  } else {
    aa = u128(a) % n;
  }
  while (aa != 0) {
    while ((aa & 1) == 0) {
      aa >>= 1;
      u64 nm8 = u64(n % 8);
      if (nm8 == 3 || nm8 == 5) t = -t;
    }
    u128 tmp = aa; aa = n; n = tmp;
    if (aa % 4 == 3 && n % 4 == 3) t = -t;
    aa %= n;
  }
  return n == 1 ? t : 0;
}

inline u128 isqrt_u128(u128 n) {
  if (n == 0) return 0;
  u128 x = (u128)std::sqrt((long double)n);
  while (x > 0 && x * x > n) --x;
  while ((x + 1) * (x + 1) <= n) ++x;
  return x;
}

// Strong Lucas probable prime test with Selfridge's parameter choice.
// n odd, > 2, not a perfect square, no small prime factors.
inline bool strong_lucas_probable_prime_u128(u128 n) {
  i64 d = 5;
  for (;;) {
    int j = jacobi_i64_u128(d, n);
    if (j == 0) return false;  // shares a factor with n
    if (j == -1) break;
    d = d > 0 ? -(d + 2) : -(d - 2);
    if (d > 1000000) return false;  // unreachable for non-squares
  }
  // P = 1, Q = (1 - D)/4.
  i64 q_int = (1 - d) / 4;
  u128 qm = q_int >= 0 ? u128(q_int) % n : n - (u128(-q_int) % n);
  u128 dm = d >= 0 ? u128(d) % n : n - (u128(-d) % n);

  u128 nd = n + 1;
  int s = 0;
  while ((nd & 1) == 0) { nd >>= 1; ++s; }
  // nd is now the odd part of n + 1.

  auto halve = [&](u128 x) { return (x & 1) ? (x + n) >> 1 : x >> 1; };

  u128 u = 1, v = 1, qk = qm;  // U_1, V_1, Q^1
  int bits = 0;
  u128 tmp = nd;
  while (tmp > 1) { tmp >>= 1; ++bits; }
  for (int i = bits - 1; i >= 0; --i) {
    // (U, V, Q^k) -> (U_{2k}, V_{2k}, Q^{2k})
    u = mulmod_u128(u, v, n);
    v = mulmod_u128(v, v, n);
    u128 two_qk = 2 * qk % n;
    v = v >= two_qk ? v - two_qk : v + n - two_qk;
    qk = mulmod_u128(qk, qk, n);
    if ((nd >> i) & 1) {
      // advance by one: U' = (U + V)/2, V' = (D U + V)/2
      u128 un = halve((u + v) % n);
      u128 vn = halve((mulmod_u128(dm, u, n) + v) % n);
      u = un;
      v = vn;
      qk = mulmod_u128(qk, qm, n);
    }
  }
  if (u == 0 || v == 0) return true;
  for (int i = 1; i < s; ++i) {
    v = mulmod_u128(v, v, n);
    u128 two_qk = 2 * qk % n;
    v = v >= two_qk ? v - two_qk : v + n - two_qk;
    qk = mulmod_u128(qk, qk, n);
    if (v == 0) return true;
  }
  return false;
}

inline bool baillie_psw_u128(u128 n) {
  for (u32 p : kTrialPrimes)
    if (n % p == 0) return n == p;
  // strong base-2 test
  u128 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) { d >>= 1; ++s; }
  u128 x = pow_mod_u128(2, d, n);
  if (x != 1 && x != n - 1) {
    bool hit = false;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u128(x, x, n);
      if (x == n - 1) { hit = true; break; }
    }
    if (!hit) return false;
  }
  u128 r = isqrt_u128(n);
  if (r * r == n) return false;
  return strong_lucas_probable_prime_u128(n);
}

}  // namespace detail

// ---------------------------------------------------------------------
// Public modular exponentiation: a may be negative, the result is the
// canonical residue of a^e mod m.

inline u64 pow_mod(i64 a, u64 e, u64 m) {
  if (m == 0) throw std::invalid_argument("pow_mod: modulus must be positive");
  i128 r = i128(a) % i128(m);
  if (r < 0) r += m;
  return detail::pow_mod_u64(u64(r), e, m);
}

// ---------------------------------------------------------------------
// Primality interface.

struct PrimalityResult {
  bool is_prime = false;
  // true when the answer comes from an exact method (trial division or
  // the fixed-witness Miller-Rabin below 2^64)
  bool deterministic = true;
};

inline PrimalityResult classify_primality(WideInt n) {
  if (n.value < 2) return {false, true};
  u128 v = u128(n.value);
  if (v < (u128(1) << 64)) return {detail::is_prime_u64(u64(v)), true};
  return {detail::baillie_psw_u128(v), false};
}

inline bool is_prime(WideInt n) { return classify_primality(n).is_prime; }

// ---------------------------------------------------------------------
// Sieving.

constexpr u64 kSieveLimitMax = u64(1) << 40;
constexpr std::size_t kDefaultSegmentBytes = 256 * 1024;

struct PrimeTable {
  u64 limit = 0;
  std::vector<u64> primes;

  std::size_t size() const { return primes.size(); }
  bool empty() const { return primes.empty(); }
  u64 operator[](std::size_t i) const { return primes[i]; }
  auto begin() const { return primes.begin(); }
  auto end() const { return primes.end(); }
};

namespace detail {

// Plain odd-only sieve used for base primes (limit is at most 2^20).
inline std::vector<u64> small_primes_upto(u64 limit) {
  std::vector<u64> out;
  if (limit < 2) return out;
  out.push_back(2);
  std::size_t half = std::size_t((limit - 1) / 2);  // flags for 3, 5, 7, ...
  std::vector<std::uint8_t> composite(half, 0);
  for (std::size_t i = 0; i < half; ++i) {
    u64 p = 2 * i + 3;
    if (p * p > limit) break;
    if (composite[i]) continue;
    for (u64 j = (p * p - 3) / 2; j < half; j += p) composite[std::size_t(j)] = 1;
  }
  for (std::size_t i = 0; i < half; ++i)
    if (!composite[i]) out.push_back(2 * i + 3);
  return out;
}

// Calls fn(p) for every prime in [lo, hi], ascending.  base must hold
// all primes up to sqrt(hi).
template <class Fn>
void sieve_segments(u64 lo, u64 hi, const std::vector<u64>& base, std::size_t segment_bytes, Fn&& fn) {
  if (hi < 2 || hi < lo) return;
  if (lo <= 2) {
    if (hi >= 2) fn(u64(2));
    lo = 3;
  }
  if (lo % 2 == 0) ++lo;
  if (lo > hi) return;
  if (segment_bytes < 1024) segment_bytes = 1024;
  const u64 span = u64(segment_bytes) * 2;  // one byte per odd number
  std::vector<std::uint8_t> flags;
  for (u64 seg_lo = lo; seg_lo <= hi; seg_lo += span) {
    u64 seg_hi = std::min(hi, seg_lo + span - 2);
    std::size_t count = std::size_t((seg_hi - seg_lo) / 2 + 1);
    flags.assign(count, 0);
    for (u64 p : base) {
      if (p == 2) continue;
      if (p * p > seg_hi) break;
      u64 start = std::max(p * p, ((seg_lo + p - 1) / p) * p);
      if (start % 2 == 0) start += p;
      for (u64 m = start; m <= seg_hi; m += 2 * p) flags[std::size_t((m - seg_lo) / 2)] = 1;
    }
    for (std::size_t i = 0; i < count; ++i)
      if (!flags[i]) fn(seg_lo + 2 * i);
  }
}

}  // namespace detail

// Streams every prime p <= limit to fn in increasing order.
template <class Fn>
void for_primes(u64 limit, Fn&& fn, std::size_t segment_bytes = kDefaultSegmentBytes) {
  if (limit > kSieveLimitMax)
    throw std::invalid_argument("for_primes: limit exceeds 2^40");
  if (limit < 2) return;
  u64 root = u64(std::sqrt(double(limit)));
  while (root * root > limit) --root;
  while ((root + 1) * (root + 1) <= limit) ++root;
  auto base = detail::small_primes_upto(root);
  detail::sieve_segments(2, limit, base, segment_bytes, fn);
}

// Streams every prime in [lo, hi] to fn in increasing order.
template <class Fn>
void for_primes_in(u64 lo, u64 hi, Fn&& fn, std::size_t segment_bytes = kDefaultSegmentBytes) {
  if (hi > kSieveLimitMax)
    throw std::invalid_argument("for_primes_in: limit exceeds 2^40");
  if (hi < 2 || hi < lo) return;
  u64 root = u64(std::sqrt(double(hi)));
  while (root * root > hi) --root;
  while ((root + 1) * (root + 1) <= hi) ++root;
  auto base = detail::small_primes_upto(root);
  detail::sieve_segments(lo, hi, base, segment_bytes, fn);
}

inline PrimeTable sieve_primes(u64 limit, std::size_t segment_bytes = kDefaultSegmentBytes) {
  if (limit > kSieveLimitMax)
    throw std::invalid_argument("sieve_primes: limit exceeds 2^40");
  PrimeTable table;
  table.limit = limit;
  if (limit >= 2)
    table.primes.reserve(std::size_t(double(limit) / std::log(double(limit < 8 ? 8 : limit)) * 1.2) + 16);
  for_primes(limit, [&](u64 p) { table.primes.push_back(p); }, segment_bytes);
  return table;
}

}  // namespace primepair
