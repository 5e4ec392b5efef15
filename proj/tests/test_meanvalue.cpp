#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "primepair/meanvalue.hpp"

using namespace primepair;

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

double cubic_first_branch(double u) { return 1.0 - 6.0 * u * u + 6.0 * u * u * u; }
double cubic_second_branch(double u) { return 2.0 * (1.0 - u) * (1.0 - u) * (1.0 - u); }

}  // namespace

TEST_CASE("cubic kernel point values") {
  auto unit = cubic_kernel(1.0);
  CHECK(kernel_eval(unit, 0.0) == 1.0);
  CHECK(kernel_eval(unit, 1.0) == 0.0);
  CHECK(kernel_eval(unit, -1.0) == 0.0);
  CHECK(kernel_eval(unit, 0.5) == 0.25);
  CHECK(kernel_eval(unit, 2.7) == 0.0);

  auto wide = cubic_kernel(2.0);
  CHECK(kernel_eval(wide, 1.0) == 0.25);
  CHECK(kernel_eval(wide, 0.0) == 1.0);
  CHECK(kernel_eval(wide, 2.0) == 0.0);
  CHECK(kernel_eval(wide, -5.0) == 0.0);
}

TEST_CASE("cubic kernel branches meet at the midpoint") {
  // Both closed forms give exactly 0.25 in double arithmetic.
  CHECK(cubic_first_branch(0.5) == 0.25);
  CHECK(cubic_second_branch(0.5) == 0.25);
  // Continuity across the split, sampled just on either side.
  for (double eps : {1e-9, 1e-12, 1e-13}) {
    double lo = cubic_first_branch(0.5 - eps);
    double hi = cubic_second_branch(0.5 + eps);
    CHECK(close(lo, hi, 1e-8));
  }
  auto unit = cubic_kernel(1.0);
  CHECK(close(kernel_eval(unit, 0.5 - 1e-13), kernel_eval(unit, 0.5 + 1e-13), 1e-12));
}

TEST_CASE("cubic kernel is even, bounded, and nonincreasing") {
  auto kern = cubic_kernel(3.0);
  double prev = kernel_eval(kern, 0.0);
  CHECK(prev == 1.0);
  const int grid = 10000;
  for (int i = 1; i <= grid; ++i) {
    double nu = 3.0 * double(i) / double(grid);
    double v = kernel_eval(kern, nu);
    CHECK(v == kernel_eval(kern, -nu));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("kernel constructors reject bad window lengths") {
  CHECK_THROWS_AS(cubic_kernel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(cubic_kernel(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(flat_kernel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(flat_kernel(-2.0), std::invalid_argument);
}

TEST_CASE("kernel areas: closed form and quadrature") {
  auto cubic = cubic_kernel(1.0);
  CHECK(kernel_area(cubic) == 0.375);
  CHECK(close(kernel_area_by_quadrature(cubic), 0.375, 1e-9));
  CHECK(kernel_area(cubic) > 0.0);
  CHECK(kernel_area(cubic) <= 1.0);

  auto flat = flat_kernel(5.0);
  CHECK(kernel_area(flat) == 1.0);
  CHECK(close(kernel_area_by_quadrature(flat), 1.0, 1e-12));
  CHECK(kernel_eval(flat, 4.9) == 1.0);
  CHECK(kernel_eval(flat, 5.1) == 0.0);
}

TEST_CASE("residual with all constants stubbed to one is a Riemann error") {
  auto ones = [](i64) { return 1.0; };
  double r1 = residual_from_constants(1, 1000.0, cubic_kernel(), ones);
  // The stub sum tracks lambda times the kernel area to O(1).
  CHECK(std::abs(r1) <= 1.5);
  double weighted = 1.0 * r1 + 1000.0 * 0.375;
  CHECK(close(weighted / (1000.0 * 0.375), 1.0, 0.02));

  double r2 = residual_from_constants(2, 1000.0, cubic_kernel(), ones);
  CHECK(close(r2, r1 / 2.0, 1e-12));

  // Flat profile: every weight is 1, so the window sum is exact and the
  // only deviation is the area term.
  double rf = residual_from_constants(1, 100.0, flat_kernel(), ones);
  CHECK(close(rf, 0.0, 1e-9));
}

TEST_CASE("residual matches a four-term hand evaluation") {
  double c2 = c_constant(1, 2, 1000000).value;
  double r = residual_R(1, 4.0, 1000000);
  // Window 2r = -4,-2,2,4 with weights 0, 0.25, 0.25, 0; the degree-1
  // constants at offsets 2 and -2 coincide.
  double expected = 0.5 * c2 - 4.0 * 0.375;
  CHECK(close(r, expected, 1e-12));
  CHECK(close(r, -1.170, 2e-3));
}

TEST_CASE("residual for the quadratic family over a short window") {
  double r = residual_R(2, 200.0, 100000);
  CHECK(close(r, -1.767071, 1e-3));
  CHECK(std::abs(r) / 200.0 < 0.15);
  CHECK_THROWS_AS(residual_R(2, 1.0, 100000), std::invalid_argument);
}

TEST_CASE("windowed mean of the quadratic adjusted constants") {
  auto report = mean_S(2, 30.0, 1000000);
  CHECK(report.k == 2);
  CHECK(report.lambda == 30.0);
  CHECK(report.truncation_bound == 1000000);
  CHECK(report.terms == 30);
  CHECK(report.mean == report.sum / 30.0);
  CHECK(close(report.mean, 0.982008, 2e-3));
  CHECK(std::isfinite(report.residual));
}

TEST_CASE("one-sided mean of the cubic adjusted constants") {
  auto report = mean_S(3, 24.0, 100000, WindowMode::PositiveOnly);
  CHECK(report.terms == 12);
  CHECK(report.mean == report.sum / 12.0);
  CHECK(close(report.mean, 0.933651, 2e-3));
}

TEST_CASE("degree-1 window mean approaches one") {
  auto report = mean_S(1, 2000.0, 100000);
  CHECK(report.terms == 2000);
  CHECK(close(report.mean, 1.0, 0.01));
}

TEST_CASE("mean_S repeats bitwise once summands are cached") {
  constant_store().clear();
  auto first = mean_S(2, 30.0, 10000);
  auto second = mean_S(2, 30.0, 10000);
  CHECK(first.sum == second.sum);
  CHECK(first.mean == second.mean);
  CHECK(first.residual == second.residual);

  // Summing the cached one-offset values in the same order reproduces
  // the batch sum exactly.
  detail::NeumaierSum sum;
  for (i64 two_r : detail::window_offsets(30.0, WindowMode::BothSigns))
    sum.add(c_constant(2, two_r, 10000).value);
  CHECK(sum.total() == first.sum);
}

TEST_CASE("quick mean-value trend for the quadratic family") {
  for (double lambda : {100.0, 200.0}) {
    auto report = mean_S(2, lambda, 100000);
    CHECK(report.mean >= 0.85);
    CHECK(report.mean <= 1.15);
  }
}

TEST_CASE("mean_S validates the window length") {
  CHECK_THROWS_AS(mean_S(2, 1.5, 10000), std::invalid_argument);
  CHECK_THROWS_AS(mean_S(2, 0.0, 10000), std::invalid_argument);
}

TEST_CASE("corrected partial sums stay bounded") {
  double d3 = s_m_deviation(1000, 1000000);
  CHECK(close(d3, 0.3708, 0.01));
  double d4 = s_m_deviation(10000, 1000000);
  CHECK(close(d4, 0.4831, 0.01));
  CHECK(std::abs(d3) <= 5.0);
  CHECK(std::abs(d4) <= 5.0);
  CHECK(std::isfinite(s_m_deviation(10, 10000)));
  CHECK_THROWS_AS(s_m_deviation(9, 10000), std::invalid_argument);
  CHECK(s_m_deviation(1000, 1000000, 3) == d3);
}

TEST_CASE("subsequence means match the odd-divisor product") {
  CHECK(close(subsequence_mean(2, 10000, 1000000), 0.9998, 3e-3));
  CHECK(close(subsequence_mean(3, 10000, 1000000), 1.4998, 3e-3));
  CHECK(close(subsequence_mean(5, 10000, 1000000), 1.2498, 3e-3));
  CHECK(close(subsequence_mean(1, 1000, 1000000), 0.997891, 3e-3));
  CHECK_THROWS_AS(subsequence_mean(0, 10, 10000), std::invalid_argument);
  CHECK_THROWS_AS(subsequence_mean(3, 0, 10000), std::invalid_argument);
  CHECK_THROWS_AS(subsequence_mean(u64(1) << 40, u64(1) << 24, 10000), std::overflow_error);
  CHECK(subsequence_mean(3, 2000, 100000, 4) == subsequence_mean(3, 2000, 100000, 1));
}

TEST_CASE("gamma means over integer windows") {
  CHECK(close(mean_gamma(2, 1, 20, 1000000), 0.9934, 3e-3));
  CHECK(close(mean_gamma(2, -20, -1, 1000000), 1.0317, 3e-3));
  CHECK_THROWS_AS(mean_gamma(2, 5, 4, 10000), std::invalid_argument);
  CHECK_THROWS_AS(mean_gamma(2, 0, 0, 10000), std::invalid_argument);
  // A window straddling zero skips q = 0 and averages the other four.
  double straddle = mean_gamma(2, -2, 2, 10000);
  double byhand = (gamma_constant(2, -2, 10000).value + gamma_constant(2, -1, 10000).value +
                   gamma_constant(2, 1, 10000).value + gamma_constant(2, 2, 10000).value) /
                  4.0;
  CHECK(close(straddle, byhand, 1e-15));
}
