#pragma once

// Prime pair counting for families (p, p^k + 2r): exact counts, the
// log^2-weighted sum, the comparison integral li_m, and combined table
// rows.  Scanning is chunked over fixed spans so parallel runs merge in
// chunk order and produce identical bytes for any thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "primepair/detail/accumulate.hpp"
#include "primepair/residues.hpp"

namespace primepair {

struct CountRecord {
  u64 x = 0;
  u64 pair_count = 0;   // primes p <= x with p^k + 2r prime
  double theta = 0.0;   // sum of log^2 p over those p
  double li2 = 0.0;
  double predicted = 0.0;  // round(constant * li2)
  double ratio = 0.0;      // pair_count / predicted, 0 when undefined
};

namespace detail {

// Numbers per scan chunk.  Fixed so that the chunk partition, and with
// it every merged floating-point result, is independent of threading.
constexpr u64 kCountSpan = u64(1) << 22;

inline void check_pair_range(const PairFamily& f, u64 x) {
  validate(f);
  if (x > u64(INT64_MAX))
    throw std::overflow_error("count_pairs: x exceeds the supported range");
  WideInt::pow(i64(x), f.k).plus(f.two_r);  // throws overflow_error if unrepresentable
  if (x > kSieveLimitMax)
    throw std::invalid_argument("count_pairs: x exceeds the sieve limit of 2^40");
}

struct ChunkTally {
  std::vector<u64> count;    // one slot per checkpoint bucket
  std::vector<double> theta;
};

// Scans primes in [2, xs.back()] and tallies pairs into the bucket of
// the smallest checkpoint >= p.  xs must be ascending and nonempty.
inline std::vector<ChunkTally> scan_chunks(const PairFamily& f, const std::vector<u64>& xs,
                                           unsigned threads, u64 span) {
  const u64 x_max = xs.back();
  const std::size_t nbuckets = xs.size();
  const u64 nchunks = x_max < 2 ? 0 : (x_max - 1 + span) / span;
  std::vector<ChunkTally> tallies(static_cast<std::size_t>(nchunks));

  std::atomic<u64> next{0};
  auto worker = [&] {
    for (;;) {
      u64 c = next.fetch_add(1);
      if (c >= nchunks) return;
      u64 lo = 2 + c * span;
      u64 hi = std::min(x_max, lo + span - 1);
      ChunkTally tally;
      tally.count.assign(nbuckets, 0);
      tally.theta.assign(nbuckets, 0.0);
      std::vector<NeumaierSum> theta_acc(nbuckets);
      for_primes_in(lo, hi, [&](u64 p) {
        i128 mate = 1;
        for (unsigned i = 0; i < f.k; ++i) mate *= i128(p);
        mate += f.two_r;
        if (mate <= 1 || !is_prime(WideInt(mate))) return;
        std::size_t b = std::size_t(std::lower_bound(xs.begin(), xs.end(), p) - xs.begin());
        tally.count[b] += 1;
        double lp = std::log(double(p));
        theta_acc[b].add(lp * lp);
      });
      for (std::size_t b = 0; b < nbuckets; ++b) tally.theta[b] = theta_acc[b].total();
      tallies[std::size_t(c)] = std::move(tally);
    }
  };

  unsigned use = std::min<u64>(resolve_threads(threads), nchunks);
  if (use <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(use);
    for (unsigned t = 0; t < use; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return tallies;
}

// Cumulative (count, theta) at each checkpoint, merged in chunk order.
inline std::vector<std::pair<u64, double>> pair_scan(const PairFamily& f,
                                                     const std::vector<u64>& xs,
                                                     unsigned threads,
                                                     u64 span = kCountSpan) {
  check_pair_range(f, xs.empty() ? 0 : xs.back());
  std::vector<std::pair<u64, double>> out(xs.size(), {0, 0.0});
  if (xs.empty()) return out;
  auto tallies = scan_chunks(f, xs, threads, span);
  std::vector<u64> bucket_count(xs.size(), 0);
  std::vector<NeumaierSum> bucket_theta(xs.size());
  for (const auto& tally : tallies) {
    for (std::size_t b = 0; b < xs.size(); ++b) {
      bucket_count[b] += tally.count[b];
      bucket_theta[b].add(tally.theta[b]);
    }
  }
  u64 running = 0;
  NeumaierSum running_theta;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    running += bucket_count[b];
    running_theta.add(bucket_theta[b].total());
    out[b] = {running, running_theta.total()};
  }
  return out;
}

}  // namespace detail

inline u64 count_pairs(const PairFamily& f, u64 x, unsigned threads = 0) {
  return detail::pair_scan(f, {x}, threads)[0].first;
}

inline u64 count_pairs(unsigned k, i64 two_r, u64 x, unsigned threads = 0) {
  return count_pairs(PairFamily{k, two_r}, x, threads);
}

inline double theta(const PairFamily& f, u64 x, unsigned threads = 0) {
  return detail::pair_scan(f, {x}, threads)[0].second;
}

inline double theta(unsigned k, i64 two_r, u64 x, unsigned threads = 0) {
  return theta(PairFamily{k, two_r}, x, threads);
}

// ---------------------------------------------------------------------
// li_m(x) = integral from 2 to x of dt/log^m t, by adaptive
// Gauss-Legendre quadrature on geometrically spaced panels.

namespace detail {

struct GaussRule {
  std::vector<double> node;
  std::vector<double> weight;
};

inline const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    constexpr int n = 24;
    GaussRule r;
    r.node.resize(n);
    r.weight.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 1; j <= n; ++j) {
          double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / double(j);
        }
        pp = double(n) * (z * p1 - p2) / (z * z - 1.0);
        double z1 = z;
        z = z1 - p1 / pp;
        if (std::abs(z - z1) < 1e-15) break;
      }
      r.node[i] = -z;
      r.node[n - 1 - i] = z;
      r.weight[i] = r.weight[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return r;
  }();
  return rule;
}

template <class F>
double gauss_panel(F&& f, double a, double b) {
  const GaussRule& rule = gauss_rule();
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  NeumaierSum sum;
  for (std::size_t i = 0; i < rule.node.size(); ++i)
    sum.add(rule.weight[i] * f(mid + half * rule.node[i]));
  return half * sum.total();
}

template <class F>
double adaptive_panel(F&& f, double a, double b, double whole, int depth) {
  double mid = 0.5 * (a + b);
  double left = gauss_panel(f, a, mid);
  double right = gauss_panel(f, mid, b);
  double split = left + right;
  if (depth >= 12 || std::abs(split - whole) <= 1e-12 * (std::abs(split) + 1e-300))
    return split;
  return adaptive_panel(f, a, mid, left, depth + 1) +
         adaptive_panel(f, mid, b, right, depth + 1);
}

}  // namespace detail

inline double li(unsigned m, double x) {
  if (m < 1) throw std::invalid_argument("li: order must be at least 1");
  if (!(x >= 2.0)) throw std::invalid_argument("li: lower integration limit is 2");
  if (x == 2.0) return 0.0;
  auto integrand = [m](double t) {
    double lg = std::log(t);
    double denom = lg;
    for (unsigned i = 1; i < m; ++i) denom *= lg;
    return 1.0 / denom;
  };
  detail::NeumaierSum total;
  double a = 2.0;
  while (a < x) {
    double b = std::min(x, a * 2.0);
    total.add(detail::adaptive_panel(integrand, a, b, detail::gauss_panel(integrand, a, b), 0));
    a = b;
  }
  return total.total();
}

// ---------------------------------------------------------------------
// Table rows: exact counts plus the comparison columns.

inline std::vector<CountRecord> table_report(const PairFamily& f, const std::vector<u64>& xs,
                                             double constant, unsigned threads = 0) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] <= xs[i - 1]) throw std::invalid_argument("table_report: x values must ascend");
  std::vector<CountRecord> records(xs.size());
  if (xs.empty()) return records;
  auto scans = detail::pair_scan(f, xs, threads);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CountRecord& rec = records[i];
    rec.x = xs[i];
    rec.pair_count = scans[i].first;
    rec.theta = scans[i].second;
    rec.li2 = li(2, double(xs[i]));
    rec.predicted = std::round(constant * rec.li2);
    rec.ratio = rec.predicted > 0.0 ? double(rec.pair_count) / rec.predicted : 0.0;
  }
  return records;
}

}  // namespace primepair
