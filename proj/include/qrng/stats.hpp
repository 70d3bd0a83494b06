#pragma once

// Special functions and chi-square helpers shared by the health monitor and
// the statistical battery.

#include <cstdint>
#include <span>
#include <vector>

namespace qrng {

class Histogram;

// Complementary error function.
double erfc(double x);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double igamc(double a, double x);

// Standard normal CDF.
double normal_cdf(double x);

// Upper tail of the chi-square law with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Pearson chi-square of observed counts against expected probabilities.
// Adjacent bins are pooled until each pooled expectation reaches
// `min_expected`; a short remainder is folded into the last pool.
// Throws InsufficientSampleError when fewer than two pools remain.
ChiSquareResult pooled_chi_square(std::span<const std::uint64_t> observed,
                                  std::span<const double> probabilities, double min_expected = 5.0);

// Chi-square p-value of a histogram against the uniform law on its bins.
double uniform_chi_square_p(const Histogram& h);

}  // namespace qrng
