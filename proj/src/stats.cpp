#include "qrng/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "qrng/errors.hpp"
#include "qrng/histogram.hpp"

namespace qrng {

double erfc(double x) { return std::erfc(x); }

double igamc(double a, double x)
{
    if (!(a > 0.0) || std::isnan(x)) throw InputError("igamc: requires a > 0");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    // gamma_q underflows cleanly to 0 for enormous statistics.
    return boost::math::gamma_q(a, x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double chi_square_sf(double statistic, double dof) { return igamc(dof / 2.0, statistic / 2.0); }

ChiSquareResult pooled_chi_square(std::span<const std::uint64_t> observed,
                                  std::span<const double> probabilities, double min_expected)
{
    if (observed.size() != probabilities.size()) throw InputError("chi-square: size mismatch");
    const double total = static_cast<double>(
        std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
    const double mass = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);

    std::vector<double> exp_pool;
    std::vector<double> obs_pool;
    double e_acc = 0.0, o_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        e_acc += total * probabilities[i] / mass;
        o_acc += static_cast<double>(observed[i]);
        if (e_acc >= min_expected) {
            exp_pool.push_back(e_acc);
            obs_pool.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp_pool.empty()) {
            exp_pool.push_back(e_acc);
            obs_pool.push_back(o_acc);
        } else {
            exp_pool.back() += e_acc;
            obs_pool.back() += o_acc;
        }
    }
    if (exp_pool.size() < 2) throw InsufficientSampleError("chi-square: fewer than two pooled bins");

    ChiSquareResult r;
    for (std::size_t i = 0; i < exp_pool.size(); ++i) {
        const double d = obs_pool[i] - exp_pool[i];
        r.statistic += d * d / exp_pool[i];
    }
    r.dof = static_cast<int>(exp_pool.size()) - 1;
    r.p_value = chi_square_sf(r.statistic, r.dof);
    return r;
}

double uniform_chi_square_p(const Histogram& h)
{
    if (h.total() == 0) throw InsufficientSampleError("uniformity test on an empty histogram");
    const double expected = static_cast<double>(h.total()) / static_cast<double>(h.size());
    double chi = 0.0;
    for (auto c : h.bins()) {
        const double d = static_cast<double>(c) - expected;
        chi += d * d / expected;
    }
    return chi_square_sf(chi, static_cast<double>(h.size() - 1));
}

}  // namespace qrng
