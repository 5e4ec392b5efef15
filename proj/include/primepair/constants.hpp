#pragma once

// Truncated Euler products for the prime-pair constants: the classical
// Hardy-Littlewood constant C_{2r}, the adjusted pair constant C^k_{2r},
// the single-polynomial constant gamma^k_q, their ratio product, and the
// Bateman-Horn normalization (2/k) C^k_{2r}.
//
// The gamma and C products converge only conditionally, so factors are
// always taken over primes in increasing order.  Accumulation happens in
// log space with compensated block sums merged in block index order,
// which makes every result bit-identical regardless of thread count and
// makes a batch evaluation agree exactly with one-offset calls.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "primepair/detail/accumulate.hpp"
#include "primepair/residues.hpp"

namespace primepair {

struct EulerProductEstimate {
  double value = 0.0;
  u64 truncation_bound = 0;   // product taken over odd primes <= this
  u64 factors_used = 0;       // 0 when reducibility skips the product
  bool vanished = false;      // some local factor is exactly 0
  bool reducible = false;     // constant is 0 because x^k + q factors
};

enum class ConstantKind { HardyLittlewood, PairAdjusted, SingleGamma };

struct ConstantKey {
  ConstantKind kind;
  unsigned k;
  i64 q;  // the pair offset 2r, or the gamma offset
  u64 truncation_bound;
  friend auto operator<=>(const ConstantKey&, const ConstantKey&) = default;
};

// In-memory record of every constant computed in this process.  The
// insert hook lets the persistence layer append new rows as they appear;
// it fires only for keys not seen before.
class ConstantStore {
 public:
  using InsertHook = std::function<void(const ConstantKey&, const EulerProductEstimate&)>;

  std::optional<EulerProductEstimate> find(const ConstantKey& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const ConstantKey& key, const EulerProductEstimate& est) {
    InsertHook hook;
    {
      std::unique_lock lock(mutex_);
      auto [it, inserted] = entries_.emplace(key, est);
      if (!inserted) return;
      hook = on_insert_;
    }
    if (hook) hook(key, est);
  }

  void set_insert_hook(InsertHook hook) {
    std::unique_lock lock(mutex_);
    on_insert_ = std::move(hook);
  }

  void clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    std::shared_lock lock(mutex_);
    for (const auto& [key, est] : entries_) fn(key, est);
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<ConstantKey, EulerProductEstimate> entries_;
  InsertHook on_insert_;
};

inline ConstantStore& constant_store() {
  static ConstantStore store;
  return store;
}

// ---------------------------------------------------------------------
// Shared prime and smallest-prime-factor tables, grown on demand.

namespace detail {

inline std::shared_ptr<const std::vector<u64>> prime_snapshot(u64 limit) {
  static std::mutex mutex;
  static std::shared_ptr<const std::vector<u64>> current;
  static u64 current_limit = 0;
  std::lock_guard lock(mutex);
  if (!current || current_limit < limit) {
    current = std::make_shared<const std::vector<u64>>(sieve_primes(limit).primes);
    current_limit = limit;
  }
  return current;
}

inline std::shared_ptr<const std::vector<u32>> spf_snapshot(u32 limit) {
  static std::mutex mutex;
  static std::shared_ptr<const std::vector<u32>> current;
  static u32 current_limit = 0;
  std::lock_guard lock(mutex);
  if (!current || current_limit < limit) {
    // grow geometrically so ascending request sequences rebuild O(log) times
    u64 grown = std::max<u64>({u64(limit), u64(1) << 16, u64(current_limit) * 2});
    u32 n = u32(std::min<u64>(grown, std::numeric_limits<u32>::max() - 1));
    auto spf = std::make_shared<std::vector<u32>>(std::size_t(n) + 1, 0u);
    auto& s = *spf;
    for (u32 i = 2; i <= n; ++i) {
      if (s[i] != 0) continue;
      for (u64 j = i; j <= n; j += i)
        if (s[std::size_t(j)] == 0) s[std::size_t(j)] = i;
    }
    current = std::move(spf);
    current_limit = n;
  }
  return current;
}

// Distinct odd prime divisors of n, increasing.
inline void distinct_odd_prime_divisors(u64 n, std::vector<u64>& out) {
  out.clear();
  while (n % 2 == 0) n /= 2;
  if (n <= 1) return;
  if (n <= (u64(1) << 22)) {
    auto spf = spf_snapshot(u32(n));
    while (n > 1) {
      u64 p = (*spf)[std::size_t(n)];
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  } else {
    for (u64 d = 3; d * d <= n; d += 2) {
      if (n % d != 0) continue;
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
    if (n > 1) out.push_back(n);
  }
}

// Sum of the per-offset log factors over the primes [0, n) of `primes`,
// in fixed blocks merged in block order.  per_prime(p, out) must fill
// out[0..nq) with the log factor at p for every offset.
template <class PerPrime>
std::vector<double> batched_log_sum(const u64* primes, std::size_t n, std::size_t nq,
                                    unsigned threads, PerPrime&& per_prime) {
  std::vector<double> out(nq, 0.0);
  if (n == 0 || nq == 0) return out;
  const std::size_t nblocks = (n + kAccumBlock - 1) / kAccumBlock;
  std::vector<double> partial(nblocks * nq, 0.0);
  run_blocks(n, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    std::vector<NeumaierSum> acc(nq);
    std::vector<double> logf(nq);
    for (std::size_t i = lo; i < hi; ++i) {
      per_prime(primes[i], logf.data());
      for (std::size_t q = 0; q < nq; ++q) acc[q].add(logf[q]);
    }
    for (std::size_t q = 0; q < nq; ++q) partial[b * nq + q] = acc[q].total();
  });
  for (std::size_t q = 0; q < nq; ++q) {
    NeumaierSum total;
    for (std::size_t b = 0; b < nblocks; ++b) total.add(partial[b * nq + q]);
    out[q] = total.total();
  }
  return out;
}

struct OddPrimeView {
  std::shared_ptr<const std::vector<u64>> hold;
  const u64* data = nullptr;
  std::size_t count = 0;
};

inline OddPrimeView odd_primes_upto(u64 P) {
  OddPrimeView view;
  view.hold = prime_snapshot(P);
  const auto& primes = *view.hold;
  auto end = std::upper_bound(primes.begin(), primes.end(), P);
  auto begin = primes.begin();
  if (begin != end && *begin == 2) ++begin;
  view.data = &*begin;
  view.count = std::size_t(end - begin);
  return view;
}

// nu for the general power-residue case, p odd, canonical a = -q mod p.
inline u32 nu_from_canonical(unsigned k, u64 a, u64 p) {
  if (a == 0) return 1;
  if (k == 1) return 1;
  if (k == 3 && p % 3 == 2) return 1;
  u64 g = std::gcd(u64(k), p - 1);
  return pow_mod_u64(a, (p - 1) / g, p) == 1 ? u32(g) : 0;
}

inline u64 canonical_mod(i64 v, u64 p) {
  i64 m = v % i64(p);
  return m < 0 ? u64(m + i64(p)) : u64(m);
}

// Batch size at which building a per-prime table of Jacobi symbols
// (multiplicative in the top argument, filled through smallest prime
// factors) beats one symbol computation per offset.
constexpr std::size_t kJacobiTableThreshold = 64;

}  // namespace detail

// ---------------------------------------------------------------------
// Reducibility of x^k + q over the integers (Capelli's criterion for the
// binomial x^k - a with a = -q: reducible iff a = b^m for some prime
// m | k, or 4 | k and a = -4 b^4).

namespace detail {

inline bool is_perfect_power(i128 a, unsigned m) {
  if (m % 2 == 0 && a < 0) return false;
  u128 mag = a < 0 ? u128(-a) : u128(a);
  double root = std::pow(double(mag), 1.0 / double(m));
  for (i64 b = std::max<i64>(1, i64(root) - 2); b <= i64(root) + 2; ++b) {
    u128 pw = 1;
    bool over = false;
    for (unsigned i = 0; i < m && !over; ++i) {
      pw *= u128(b);
      if (pw > mag) over = true;
    }
    if (!over && pw == mag) return true;
  }
  return false;
}

}  // namespace detail

inline bool is_reducible(const OffsetPolynomial& g) {
  validate(g);
  if (g.k == 1) return false;
  i128 a = -i128(g.q);
  for (unsigned m = 2, k = g.k; m <= k; ++m) {
    if (k % m != 0) continue;
    bool prime_m = true;
    for (unsigned d = 2; d * d <= m; ++d)
      if (m % d == 0) { prime_m = false; break; }
    if (prime_m && detail::is_perfect_power(a, m)) return true;
  }
  if (g.k % 4 == 0 && a < 0 && (-a) % 4 == 0 && detail::is_perfect_power((-a) / 4, 4))
    return true;
  return false;
}

inline bool is_reducible(unsigned k, i64 q) { return is_reducible(OffsetPolynomial{k, q}); }

// ---------------------------------------------------------------------
// Hardy-Littlewood constant C_{2r} = C_2 prod_{p|r, p>2} (p-1)/(p-2).
// The twin-constant base is memoized per truncation bound; the divisor
// adjustment is exact, so one base product serves every 2r.

namespace detail {

inline std::pair<double, u64> twin_base_log(u64 P, unsigned threads) {
  static std::mutex mutex;
  static std::map<u64, std::pair<double, u64>> memo;
  {
    std::lock_guard lock(mutex);
    auto it = memo.find(P);
    if (it != memo.end()) return it->second;
  }
  auto view = odd_primes_upto(P);
  auto sums = batched_log_sum(view.data, view.count, 1, threads, [](u64 p, double* out) {
    double pm1 = double(p - 1);
    out[0] = std::log1p(-1.0 / (pm1 * pm1));
  });
  std::pair<double, u64> result{sums[0], view.count};
  std::lock_guard lock(mutex);
  memo.emplace(P, result);
  return result;
}

}  // namespace detail

inline EulerProductEstimate hl_constant(i64 two_r, u64 P, unsigned threads = 0) {
  if (two_r == 0 || two_r % 2 != 0)
    throw std::invalid_argument("hl_constant: offset must be even and nonzero");
  if (P < 3) throw std::invalid_argument("hl_constant: truncation bound must be at least 3");
  auto [base_log, factors] = detail::twin_base_log(P, threads);
  u64 r = two_r < 0 ? u64(-(two_r / 2)) : u64(two_r / 2);
  static thread_local std::vector<u64> divisors;
  detail::distinct_odd_prime_divisors(r, divisors);
  // applied as plain multiplications so offsets with the same odd prime
  // divisors produce the same bits
  double value = std::exp(base_log);
  for (u64 p : divisors) value *= double(p - 1) / double(p - 2);
  return {value, P, factors, false, false};
}

// ---------------------------------------------------------------------
// gamma^k_q = prod_{2 < p <= P} (p/(p-1)) (p - nu_q(p))/p.

inline std::vector<EulerProductEstimate> gamma_constants_batch(unsigned k,
                                                               const std::vector<i64>& qs,
                                                               u64 P, unsigned threads = 0) {
  if (P < 3)
    throw std::invalid_argument("gamma_constants_batch: truncation bound must be at least 3");
  const std::size_t nq = qs.size();
  std::vector<EulerProductEstimate> out(nq);
  std::vector<std::size_t> live;
  std::vector<i64> live_q;
  for (std::size_t i = 0; i < nq; ++i) {
    OffsetPolynomial g{k, qs[i]};
    validate(g);
    ConstantKey key{ConstantKind::SingleGamma, k, qs[i], P};
    if (auto hit = constant_store().find(key)) {
      out[i] = *hit;
      continue;
    }
    if (is_reducible(g)) {
      out[i] = {0.0, P, 0, false, true};
      constant_store().put(key, out[i]);
      continue;
    }
    live.push_back(i);
    live_q.push_back(qs[i]);
  }
  if (live.empty()) return out;

  auto view = detail::odd_primes_upto(P);
  u64 qmax = 0;
  for (i64 q : live_q) qmax = std::max(qmax, u64(q < 0 ? -q : q));
  std::vector<double> sums;
  if (k == 2 && live_q.size() >= detail::kJacobiTableThreshold && qmax <= (u64(1) << 22)) {
    auto spf = detail::spf_snapshot(u32(qmax));
    sums = detail::batched_log_sum(
        view.data, view.count, live_q.size(), threads, [&](u64 p, double* out_f) {
          static thread_local std::vector<std::int8_t> jac;
          jac.resize(std::size_t(qmax) + 1);
          jac[1] = 1;
          for (u64 s = 2; s <= qmax; ++s) {
            u32 f = (*spf)[std::size_t(s)];
            jac[std::size_t(s)] = u64(f) == s
                                      ? std::int8_t(detail::jacobi_i64_u128(i64(s), p))
                                      : std::int8_t(jac[f] * jac[std::size_t(s / f)]);
          }
          int neg_one = p % 4 == 1 ? 1 : -1;
          double lp1 = std::log(double(p - 1));
          // nu = 1 + (-q/p) in {0, 1, 2}; p | q gives symbol 0, nu = 1
          double f0 = std::log(double(p)) - lp1;
          double f2 = std::log(double(p - 2)) - lp1;
          for (std::size_t j = 0; j < live_q.size(); ++j) {
            i64 q = live_q[j];
            int chi = q > 0 ? neg_one * jac[std::size_t(q)] : jac[std::size_t(-q)];
            out_f[j] = chi == 0 ? 0.0 : (chi < 0 ? f0 : f2);
          }
        });
  } else {
    sums = detail::batched_log_sum(
        view.data, view.count, live_q.size(), threads, [&](u64 p, double* out_f) {
          double lp1 = std::log(double(p - 1));
          for (std::size_t j = 0; j < live_q.size(); ++j) {
            u64 a = detail::canonical_mod(-live_q[j], p);
            u32 nu = detail::nu_from_canonical(k, a, p);
            out_f[j] = nu == 1 ? 0.0 : std::log(double(p - nu)) - lp1;
          }
        });
  }
  for (std::size_t j = 0; j < live.size(); ++j) {
    out[live[j]] = {std::exp(sums[j]), P, view.count, false, false};
    constant_store().put({ConstantKind::SingleGamma, k, live_q[j], P}, out[live[j]]);
  }
  return out;
}

inline EulerProductEstimate gamma_constant(const OffsetPolynomial& g, u64 P,
                                           unsigned threads = 0) {
  validate(g);
  return gamma_constants_batch(g.k, std::vector<i64>{g.q}, P, threads)[0];
}

inline EulerProductEstimate gamma_constant(unsigned k, i64 q, u64 P, unsigned threads = 0) {
  return gamma_constant(OffsetPolynomial{k, q}, P, threads);
}

// ---------------------------------------------------------------------
// C^k_{2r} = prod_{2 < p <= P} (p/(p-1))^2 (p - N_{2r}(p))/p.
//
// A factor can only vanish (N = p) at an odd prime with (p-1) | k, so a
// scan of p <= k+1 decides the vanished flag up front; the main product
// then never sees a zero factor.

namespace detail {

inline bool pair_product_vanishes(const PairFamily& f) {
  for (u64 p = 3; p <= u64(f.k) + 1; p += 2)
    if (is_prime_u64(p) && big_n_count(f, p) == p) return true;
  return false;
}

}  // namespace detail

inline std::vector<EulerProductEstimate> c_constants_batch(unsigned k,
                                                           const std::vector<i64>& two_rs,
                                                           u64 P, unsigned threads = 0) {
  if (P < 3)
    throw std::invalid_argument("c_constants_batch: truncation bound must be at least 3");
  const std::size_t nq = two_rs.size();
  std::vector<EulerProductEstimate> out(nq);
  std::vector<std::size_t> live;
  std::vector<i64> live_q;
  std::optional<u64> odd_count;
  auto count_odd = [&] {
    if (!odd_count) odd_count = detail::odd_primes_upto(P).count;
    return *odd_count;
  };
  for (std::size_t i = 0; i < nq; ++i) {
    PairFamily f{k, two_rs[i]};
    validate(f);
    ConstantKey key{ConstantKind::PairAdjusted, k, two_rs[i], P};
    if (auto hit = constant_store().find(key)) {
      out[i] = *hit;
      continue;
    }
    bool vanished = detail::pair_product_vanishes(f);
    if (is_reducible(k, two_rs[i])) {
      out[i] = {0.0, P, 0, vanished, true};
      constant_store().put(key, out[i]);
      continue;
    }
    if (vanished) {
      out[i] = {0.0, P, count_odd(), true, false};
      constant_store().put(key, out[i]);
      continue;
    }
    live.push_back(i);
    live_q.push_back(two_rs[i]);
  }
  if (live.empty()) return out;

  auto view = detail::odd_primes_upto(P);
  u64 qmax = 0;
  for (i64 q : live_q) qmax = std::max(qmax, u64(q < 0 ? -q : q));
  std::vector<double> sums;
  if (k == 2 && live_q.size() >= detail::kJacobiTableThreshold && qmax <= (u64(1) << 22)) {
    auto spf = detail::spf_snapshot(u32(qmax));
    sums = detail::batched_log_sum(
        view.data, view.count, live_q.size(), threads, [&](u64 p, double* out_f) {
          static thread_local std::vector<std::int8_t> jac;
          jac.resize(std::size_t(qmax) + 1);
          jac[1] = 1;
          for (u64 s = 2; s <= qmax; ++s) {
            u32 f = (*spf)[std::size_t(s)];
            jac[std::size_t(s)] = u64(f) == s
                                      ? std::int8_t(detail::jacobi_i64_u128(i64(s), p))
                                      : std::int8_t(jac[f] * jac[std::size_t(s / f)]);
          }
          int neg_one = p % 4 == 1 ? 1 : -1;
          double two_lp1 = 2.0 * std::log(double(p - 1));
          // N = 1 when p | 2r, otherwise 2 + (-2r/p) in {1, 2, 3}
          double n1 = std::log(double(p) * double(p - 1)) - two_lp1;
          double n2 = std::log(double(p) * double(p - 2)) - two_lp1;
          double n3 = p > 3 ? std::log(double(p) * double(p - 3)) - two_lp1 : 0.0;
          for (std::size_t j = 0; j < live_q.size(); ++j) {
            i64 q = live_q[j];
            int chi = q > 0 ? neg_one * jac[std::size_t(q)] : jac[std::size_t(-q)];
            u32 n = chi == 0 ? 1 : u32(2 + chi);
            out_f[j] = n == 1 ? n1 : (n == 2 ? n2 : n3);
          }
        });
  } else {
    sums = detail::batched_log_sum(
        view.data, view.count, live_q.size(), threads, [&](u64 p, double* out_f) {
          double two_lp1 = 2.0 * std::log(double(p - 1));
          for (std::size_t j = 0; j < live_q.size(); ++j) {
            u64 a = detail::canonical_mod(-live_q[j], p);
            u32 n = a == 0 ? 1 : detail::nu_from_canonical(k, a, p) + 1;
            out_f[j] = std::log(double(p) * double(p - n)) - two_lp1;
          }
        });
  }
  for (std::size_t j = 0; j < live.size(); ++j) {
    out[live[j]] = {std::exp(sums[j]), P, view.count, false, false};
    constant_store().put({ConstantKind::PairAdjusted, k, live_q[j], P}, out[live[j]]);
  }
  return out;
}

inline EulerProductEstimate c_constant(const PairFamily& f, u64 P, unsigned threads = 0) {
  validate(f);
  return c_constants_batch(f.k, std::vector<i64>{f.two_r}, P, threads)[0];
}

inline EulerProductEstimate c_constant(unsigned k, i64 two_r, u64 P, unsigned threads = 0) {
  return c_constant(PairFamily{k, two_r}, P, threads);
}

// ---------------------------------------------------------------------
// Ratio product C^k_{2r} / gamma^k_{2r} as an independent Euler product:
// p/(p-1) at p | 2r, otherwise (p/(p-1)) (p-nu-1)/(p-nu).

inline double c_over_gamma(const PairFamily& f, u64 P, unsigned threads = 0) {
  validate(f);
  if (P < 3) throw std::invalid_argument("c_over_gamma: truncation bound must be at least 3");
  if (is_reducible(f.k, f.two_r))
    throw std::domain_error("c_over_gamma: gamma constant is zero for a reducible polynomial");
  // a zero ratio factor (nu = p - 1 with p not dividing 2r) only occurs
  // at p <= k+1, mirroring the vanishing scan for C
  for (u64 p = 3; p <= u64(f.k) + 1; p += 2) {
    if (!detail::is_prime_u64(p)) continue;
    if (f.two_r % i64(p) != 0 && nu_count(f.k, f.two_r, p) == p - 1) return 0.0;
  }
  auto view = detail::odd_primes_upto(P);
  auto sums = detail::batched_log_sum(
      view.data, view.count, 1, threads, [&](u64 p, double* out_f) {
        double lp = std::log(double(p));
        double lp1 = std::log(double(p - 1));
        u64 a = detail::canonical_mod(-f.two_r, p);
        if (a == 0) {
          out_f[0] = lp - lp1;
          return;
        }
        u32 nu = detail::nu_from_canonical(f.k, a, p);
        out_f[0] = lp - lp1 + std::log(double(p - nu - 1)) - std::log(double(p - nu));
      });
  return std::exp(sums[0]);
}

inline double c_over_gamma(unsigned k, i64 two_r, u64 P, unsigned threads = 0) {
  return c_over_gamma(PairFamily{k, two_r}, P, threads);
}

// ---------------------------------------------------------------------
// Bateman-Horn constant for the pair {n, n^k + 2r}: (2/k) C^k_{2r}.

inline double bh_constant(const PairFamily& f, u64 P, unsigned threads = 0) {
  return 2.0 / double(f.k) * c_constant(f, P, threads).value;
}

inline double bh_constant(unsigned k, i64 two_r, u64 P, unsigned threads = 0) {
  return bh_constant(PairFamily{k, two_r}, P, threads);
}

}  // namespace primepair
