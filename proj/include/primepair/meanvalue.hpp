#pragma once

// Mean-value experiments over the prime-pair constants: windowed sums
// S^k_lambda of the adjusted constants, the corrected partial sums S_m
// of the Hardy-Littlewood constants, means over arithmetic subsequences,
// and the kernel-weighted residual that measures how far a window is
// from mean value one.
//
// Sums run over offsets in increasing order with compensated block
// accumulation, so every result is bit-identical for any thread count,
// and repeated calls reuse constants already in the store.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "primepair/constants.hpp"
#include "primepair/counting.hpp"
#include "primepair/detail/accumulate.hpp"

namespace primepair {

// ---------------------------------------------------------------------
// Sieving kernel: an even taper supported on [-lambda, lambda].  The
// profile gives E on the unit interval; eval scales the argument by
// lambda.  The kernel is pluggable, so the unit-interval area is carried
// as a closed-form field and can be cross-checked by quadrature.

struct SievingKernel {
  double lambda = 1.0;
  std::function<double(double)> profile;  // E(u) for u in [0, 1]
  double area = 0.0;                      // closed form of integral of E over [0, 1]
};

// Piecewise cubic taper: 1 - 6u^2 + 6u^3 on [0, 1/2], 2(1-u)^3 on
// [1/2, 1].  Both branches give 1/4 at u = 1/2; the unit area is 3/8.
inline SievingKernel cubic_kernel(double lambda = 1.0) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("cubic_kernel: window length must be positive");
  SievingKernel kern;
  kern.lambda = lambda;
  kern.profile = [](double u) {
    if (u <= 0.5) return 1.0 - 6.0 * u * u + 6.0 * u * u * u;
    double t = 1.0 - u;
    return 2.0 * t * t * t;
  };
  kern.area = 0.375;
  return kern;
}

// Constant-1 profile, used as a calibration stub in tests.  It breaks
// the taper-to-zero property on purpose; its unit area is exactly 1.
inline SievingKernel flat_kernel(double lambda = 1.0) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("flat_kernel: window length must be positive");
  SievingKernel kern;
  kern.lambda = lambda;
  kern.profile = [](double) { return 1.0; };
  kern.area = 1.0;
  return kern;
}

inline double kernel_eval(const SievingKernel& kern, double nu) {
  double u = std::abs(nu) / kern.lambda;
  if (u > 1.0) return 0.0;
  return kern.profile(u);
}

inline double kernel_area(const SievingKernel& kern) { return kern.area; }

// Unit-interval area by adaptive Gauss-Legendre panels.  The interval is
// split at 1/2 up front so a piecewise profile never straddles a panel.
inline double kernel_area_by_quadrature(const SievingKernel& kern) {
  auto f = [&](double u) { return kern.profile(u); };
  double left = detail::adaptive_panel(f, 0.0, 0.5, detail::gauss_panel(f, 0.0, 0.5), 0);
  double right = detail::adaptive_panel(f, 0.5, 1.0, detail::gauss_panel(f, 0.5, 1.0), 0);
  return left + right;
}

// ---------------------------------------------------------------------
// Windowed sums of the adjusted constants.

enum class WindowMode { BothSigns, PositiveOnly };

struct MeanValueReport {
  unsigned k = 0;
  double lambda = 0.0;
  u64 truncation_bound = 0;
  double sum = 0.0;       // sum of C^k_{2r} over the window
  double mean = 0.0;      // sum divided by the window length
  double residual = 0.0;  // kernel-weighted deviation from mean value one
  u64 terms = 0;          // number of offsets summed
};

namespace detail {

// Even offsets 2r with 0 < |2r| <= lambda, in increasing order.
inline std::vector<i64> window_offsets(double lambda, WindowMode mode) {
  i64 m = static_cast<i64>(std::floor(lambda / 2.0));
  std::vector<i64> out;
  out.reserve(static_cast<std::size_t>(mode == WindowMode::BothSigns ? 2 * m : m));
  if (mode == WindowMode::BothSigns)
    for (i64 r = -m; r <= -1; ++r) out.push_back(2 * r);
  for (i64 r = 1; r <= m; ++r) out.push_back(2 * r);
  return out;
}

}  // namespace detail

// Kernel-weighted window sum against caller-provided constants, divided
// by the degree and re-centered by the expected area term.  Exposed so
// calibration tests can stub every constant to 1.
inline double residual_from_constants(unsigned k, double lambda, const SievingKernel& kern,
                                      const std::function<double(i64)>& constant_at) {
  if (k < 1) throw std::invalid_argument("residual_from_constants: degree must be at least 1");
  if (!(lambda >= 2.0))
    throw std::invalid_argument("residual_from_constants: window length must be at least 2");
  SievingKernel scaled = kern;
  scaled.lambda = lambda;
  detail::NeumaierSum weighted;
  for (i64 two_r : detail::window_offsets(lambda, WindowMode::BothSigns))
    weighted.add(kernel_eval(scaled, static_cast<double>(two_r)) * constant_at(two_r));
  return (weighted.total() - lambda * kern.area) / static_cast<double>(k);
}

// Residual of the kernel-weighted window at truncation bound P.  A
// window with mean value one makes the weighted sum approach lambda
// times the kernel area, so the residual should be small next to lambda.
inline double residual_R(unsigned k, double lambda, u64 P, const SievingKernel& kern,
                         unsigned threads = 0) {
  if (!(lambda >= 2.0))
    throw std::invalid_argument("residual_R: window length must be at least 2");
  auto offsets = detail::window_offsets(lambda, WindowMode::BothSigns);
  auto estimates = c_constants_batch(k, offsets, P, threads);
  std::size_t next = 0;
  auto constant_at = [&](i64) { return estimates[next++].value; };
  return residual_from_constants(k, lambda, kern, constant_at);
}

inline double residual_R(unsigned k, double lambda, u64 P, unsigned threads = 0) {
  return residual_R(k, lambda, P, cubic_kernel(), threads);
}

// S^k_lambda: the sum of adjusted constants over a window of offsets,
// with the per-offset mean and the cubic-kernel residual attached.  The
// window length is lambda for both signs and lambda/2 for positive
// offsets only, so a family with mean value one gives mean near 1 in
// either mode.
inline MeanValueReport mean_S(unsigned k, double lambda, u64 P,
                              WindowMode mode = WindowMode::BothSigns, unsigned threads = 0) {
  if (!(lambda >= 2.0)) throw std::invalid_argument("mean_S: window length must be at least 2");
  auto offsets = detail::window_offsets(lambda, mode);
  auto estimates = c_constants_batch(k, offsets, P, threads);
  detail::NeumaierSum sum;
  for (const auto& est : estimates) sum.add(est.value);
  MeanValueReport report;
  report.k = k;
  report.lambda = lambda;
  report.truncation_bound = P;
  report.sum = sum.total();
  report.mean = report.sum / (mode == WindowMode::BothSigns ? lambda : lambda / 2.0);
  report.residual = residual_R(k, lambda, P, cubic_kernel(), threads);
  report.terms = offsets.size();
  return report;
}

// ---------------------------------------------------------------------
// Partial sums of the Hardy-Littlewood constants.

namespace detail {

inline void check_offset_range(u64 h, u64 count, const char* who) {
  u128 top = u128(2) * u128(h) * u128(count);
  if (top > u128(std::numeric_limits<i64>::max()))
    throw std::overflow_error(std::string(who) + ": offset exceeds the 64-bit range");
}

}  // namespace detail

// Deviation of S_m = sum_{1<=r<=m} C_{2r} from m - (1/2) log m, scaled
// by log^{2/3} m.  Bounded values support the conjectured second-order
// term in the partial sums.
inline double s_m_deviation(u64 m, u64 P, unsigned threads = 0) {
  if (m < 10) throw std::invalid_argument("s_m_deviation: need m >= 10");
  detail::check_offset_range(1, m, "s_m_deviation");
  double sum = detail::block_sum(m, threads, [&](std::size_t i) {
    return hl_constant(2 * static_cast<i64>(i + 1), P).value;
  });
  double lg = std::log(static_cast<double>(m));
  return (sum - static_cast<double>(m) + 0.5 * lg) / std::pow(lg, 2.0 / 3.0);
}

// Mean of C_{2hr} over r = 1..count.  The limit is the product of
// p/(p-1) over odd primes dividing h, so h = 1 or a power of 2 gives
// mean one and h = 3 gives 3/2.
inline double subsequence_mean(u64 h, u64 count, u64 P, unsigned threads = 0) {
  if (h < 1) throw std::invalid_argument("subsequence_mean: step must be at least 1");
  if (count < 1) throw std::invalid_argument("subsequence_mean: count must be at least 1");
  detail::check_offset_range(h, count, "subsequence_mean");
  double sum = detail::block_sum(count, threads, [&](std::size_t i) {
    return hl_constant(2 * static_cast<i64>(h) * static_cast<i64>(i + 1), P).value;
  });
  return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------
// Mean of the single-polynomial constants over an integer window.

// Average of gamma^k_q over the nonzero q in [q_lo, q_hi].  Offsets that
// make x^k + q reducible contribute 0, matching their stored value.
inline double mean_gamma(unsigned k, i64 q_lo, i64 q_hi, u64 P, unsigned threads = 0) {
  if (q_lo > q_hi) throw std::invalid_argument("mean_gamma: empty window");
  std::vector<i64> qs;
  qs.reserve(static_cast<std::size_t>(q_hi - q_lo + 1));
  for (i64 q = q_lo; q <= q_hi; ++q)
    if (q != 0) qs.push_back(q);
  if (qs.empty()) throw std::invalid_argument("mean_gamma: window holds no nonzero offset");
  auto estimates = gamma_constants_batch(k, qs, P, threads);
  detail::NeumaierSum sum;
  for (const auto& est : estimates) sum.add(est.value);
  return sum.total() / static_cast<double>(qs.size());
}

}  // namespace primepair
