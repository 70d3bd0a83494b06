#include "qrng/health.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrng/errors.hpp"
#include "qrng/stats.hpp"

namespace qrng {
namespace {

void require_nonempty(const Histogram& h)
{
    if (h.total() == 0) throw InsufficientSampleError("entropy of an empty histogram is undefined");
}

// CDF of the fringe position offset + scale * (1 + V cos phi) / 2.
struct FringeCdf {
    double offset;
    double scale;
    double visibility;

    double lo() const { return offset + scale * 0.5 * (1.0 - visibility); }
    double hi() const { return offset + scale * 0.5 * (1.0 + visibility); }

    double operator()(double x) const
    {
        if (x <= lo()) return 0.0;
        if (x >= hi()) return 1.0;
        const double s = (2.0 * (x - offset) / scale - 1.0) / visibility;
        return 0.5 + std::asin(std::clamp(s, -1.0, 1.0)) / std::numbers::pi;
    }
};

}  // namespace

double shannon_entropy(const Histogram& h)
{
    require_nonempty(h);
    const double total = static_cast<double>(h.total());
    double acc = 0.0;
    for (auto c : h.bins()) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        acc -= p * std::log2(p);
    }
    return acc;
}

double min_entropy(const Histogram& h)
{
    require_nonempty(h);
    const auto peak = *std::max_element(h.bins().begin(), h.bins().end());
    return -std::log2(static_cast<double>(peak) / static_cast<double>(h.total()));
}

EntropyReport entropy_report(const Histogram& h)
{
    EntropyReport r;
    r.shannon_bits = shannon_entropy(h);
    r.min_entropy_bits = min_entropy(h);
    r.per_bit_shannon = r.shannon_bits / kAdcBits;
    r.per_bit_min = r.min_entropy_bits / kAdcBits;
    return r;
}

double shannon_entropy(std::span<const double> pmf)
{
    double acc = 0.0;
    for (double p : pmf) {
        if (p > 0.0) acc -= p * std::log2(p);
    }
    return acc;
}

double min_entropy(std::span<const double> pmf)
{
    if (pmf.empty()) throw InsufficientSampleError("min-entropy of an empty pmf");
    return -std::log2(*std::max_element(pmf.begin(), pmf.end()));
}

std::vector<double> ideal_arcsine_pmf()
{
    std::vector<double> p(kAdcLevels);
    const double scale = 2.0 / std::numbers::pi;
    double prev = 0.0;
    for (int k = 0; k < kAdcLevels; ++k) {
        const double next = std::asin(std::sqrt(static_cast<double>(k + 1) / kAdcLevels));
        p[k] = scale * (next - prev);
        prev = next;
    }
    return p;
}

bool is_ideal(const SourceConfig& cfg) noexcept
{
    return cfg.visibility == 1.0 && cfg.gain == 1.0 && cfg.offset == 0.0 && cfg.noise_sigma == 0.0;
}

std::vector<double> arcsine_pmf(const SourceConfig& cfg)
{
    if (is_ideal(cfg)) return ideal_arcsine_pmf();

    const FringeCdf cdf{cfg.offset, cfg.gain * kAdcLevels, cfg.visibility};
    std::vector<double> p(kAdcLevels, 0.0);

    // Code k collects fringe-plus-noise values in [k, k+1); the end codes
    // also collect everything clamped onto them.
    auto bin_of = [](double x) {
        if (x < 1.0) return 0;
        if (x >= kAdcMax) return kAdcMax;
        return static_cast<int>(std::floor(x));
    };

    const double lo = cdf.lo();
    const double hi = cdf.hi();
    if (hi - lo <= 0.0 || cfg.visibility == 0.0) {
        // Point mass at the fringe midpoint.
        const double x0 = cfg.offset + 0.5 * cdf.scale;
        if (cfg.noise_sigma == 0.0) {
            p[bin_of(x0)] = 1.0;
            return p;
        }
        for (int k = 0; k < kAdcLevels; ++k) {
            const double a = k == 0 ? -std::numeric_limits<double>::infinity() : k;
            const double b = k == kAdcMax ? std::numeric_limits<double>::infinity() : k + 1;
            p[k] = normal_cdf((b - x0) / cfg.noise_sigma) - normal_cdf((a - x0) / cfg.noise_sigma);
        }
        return p;
    }

    if (cfg.noise_sigma == 0.0) {
        for (int k = 0; k < kAdcLevels; ++k) {
            const double a = k == 0 ? -std::numeric_limits<double>::infinity() : k;
            const double b = k == kAdcMax ? std::numeric_limits<double>::infinity() : k + 1;
            p[k] = cdf(b) - cdf(a);
        }
        return p;
    }

    // Split the fringe into cells of width h = 1/N <= min(0.1, sigma/10)
    // carrying their exact arcsine mass, and spread each cell's mass over the
    // codes with the Gaussian bin probabilities at the cell midpoint. With h
    // a unit fraction, edge e seen from cell i sits at (e*N - i)*h - lo - h/2,
    // so every Phi value comes from one table indexed by e*N - i.
    const double sigma = cfg.noise_sigma;
    const int per_code = std::max(10, static_cast<int>(std::ceil(10.0 / sigma)));
    const double h = 1.0 / per_code;
    const auto full_cells = static_cast<long>(std::floor((hi - lo) / h));
    const double reach = 9.0 * sigma + 1.0;
    const auto reach_edges = static_cast<long>(std::ceil(reach));

    const long j_min = static_cast<long>(per_code) * 1 - full_cells;
    const long j_max = static_cast<long>(per_code) * kAdcMax;
    std::vector<double> phi(static_cast<std::size_t>(j_max - j_min + 1));
    for (long j = j_min; j <= j_max; ++j) {
        phi[static_cast<std::size_t>(j - j_min)] =
            normal_cdf((static_cast<double>(j) * h - lo - 0.5 * h) / sigma);
    }

    auto spread = [&](double mass, double centre, auto&& cdf_at_edge) {
        const int e_lo = static_cast<int>(
            std::clamp<long>(static_cast<long>(std::floor(centre)) - reach_edges, 1, kAdcMax));
        const int e_hi = static_cast<int>(
            std::clamp<long>(static_cast<long>(std::ceil(centre)) + reach_edges, 1, kAdcMax));
        double prev_c = cdf_at_edge(e_lo);
        p[e_lo - 1] += mass * prev_c;
        for (int e = e_lo + 1; e <= e_hi; ++e) {
            const double cur = cdf_at_edge(e);
            p[e - 1] += mass * (cur - prev_c);
            prev_c = cur;
        }
        p[e_hi] += mass * (1.0 - prev_c);
    };

    double prev = 0.0;
    for (long i = 0; i < full_cells; ++i) {
        const double next = cdf(lo + h * static_cast<double>(i + 1));
        const double mass = next - prev;
        prev = next;
        if (mass <= 0.0) continue;
        const double centre = lo + h * (static_cast<double>(i) + 0.5);
        spread(mass, centre, [&](int e) {
            return phi[static_cast<std::size_t>(static_cast<long>(e) * per_code - i - j_min)];
        });
    }
    // Partial cell at the upper end of the fringe.
    const double rest = 1.0 - prev;
    if (rest > 0.0) {
        const double left = lo + h * static_cast<double>(full_cells);
        const double centre = 0.5 * (left + hi);
        spread(rest, centre, [&](int e) { return normal_cdf((e - centre) / sigma); });
    }
    return p;
}

double foreground_gof(const Histogram& h, std::span<const double> pmf)
{
    if (pmf.size() != h.size()) throw InputError("foreground_gof: pmf and histogram sizes differ");
    if (h.total() < 10 * h.size()) {
        throw InsufficientSampleError("foreground_gof: need at least 10 samples per bin");
    }
    return pooled_chi_square(h.bins(), pmf).p_value;
}

namespace {

struct Eval {
    double gain, offset, sigma;
    double shannon, hmin, loss;
};

Eval evaluate(double gain, double offset, double sigma, const CalibrationTarget& t)
{
    SourceConfig cfg;
    cfg.gain = gain;
    cfg.offset = offset;
    cfg.noise_sigma = sigma;
    const auto p = arcsine_pmf(cfg);
    Eval e{gain, offset, sigma, shannon_entropy(p), min_entropy(p), 0.0};
    const double ds = (e.shannon - t.shannon_bits) / t.shannon_tol;
    const double dm = (e.hmin - t.min_entropy_bits) / t.min_entropy_tol;
    const double centred = (kAdcLevels - gain * kAdcLevels) / 2.0;
    // Weak pull towards a centred fringe picks one point of the
    // one-parameter family that meets both targets.
    e.loss = ds * ds + dm * dm + 1e-6 * (offset - centred) * (offset - centred);
    return e;
}

}  // namespace

SourceCalibration calibrate_source(const CalibrationTarget& target)
{
    double g_lo = 0.2, g_hi = 1.0;
    double s_lo = 1.0, s_hi = 60.0;
    double o_rel_lo = -20.0, o_rel_hi = 20.0;  // offset relative to centred
    constexpr int kGrid = 9;
    constexpr int kOffsetGrid = 3;
    Eval best{0, 0, 0, 0, 0, std::numeric_limits<double>::infinity()};
    int evaluations = 0;

    for (int level = 0; level < 12; ++level) {
        for (int i = 0; i < kGrid; ++i) {
            const double g = g_lo + (g_hi - g_lo) * i / (kGrid - 1);
            for (int j = 0; j < kGrid; ++j) {
                const double s = s_lo + (s_hi - s_lo) * j / (kGrid - 1);
                for (int k = 0; k < kOffsetGrid; ++k) {
                    const double centred = (kAdcLevels - g * kAdcLevels) / 2.0;
                    const double o = centred + o_rel_lo + (o_rel_hi - o_rel_lo) * k / (kOffsetGrid - 1);
                    const Eval e = evaluate(g, o, s, target);
                    ++evaluations;
                    if (e.loss < best.loss) best = e;
                }
            }
        }
        // Shrink each axis to two grid cells around the incumbent.
        const double gw = (g_hi - g_lo) / (kGrid - 1) * 2.0;
        const double sw = (s_hi - s_lo) / (kGrid - 1) * 2.0;
        const double ow = (o_rel_hi - o_rel_lo) / (kOffsetGrid - 1) * 0.5;
        g_lo = std::max(0.05, best.gain - gw / 2);
        g_hi = best.gain + gw / 2;
        s_lo = std::max(0.0, best.sigma - sw / 2);
        s_hi = best.sigma + sw / 2;
        const double centred = (kAdcLevels - best.gain * kAdcLevels) / 2.0;
        o_rel_lo = best.offset - centred - ow;
        o_rel_hi = best.offset - centred + ow;
    }

    SourceCalibration c{best.gain, best.offset, best.sigma, best.shannon, best.hmin, evaluations};
    if (std::abs(c.shannon_bits - target.shannon_bits) > target.shannon_tol ||
        std::abs(c.min_entropy_bits - target.min_entropy_bits) > target.min_entropy_tol) {
        throw CalibrationError("source calibration missed the entropy targets");
    }
    return c;
}

}  // namespace qrng
