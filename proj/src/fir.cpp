#include "qrng/fir.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/histogram.hpp"
#include "qrng/stats.hpp"

namespace qrng {

std::vector<std::uint8_t> binomial_coeffs(int m)
{
    if (m < 1 || m > kMaxFirOrder) {
        throw ConfigError("FIR order must be in [1, " + std::to_string(kMaxFirOrder) + "], got " +
                          std::to_string(m));
    }
    std::vector<std::uint8_t> row(static_cast<std::size_t>(m) + 1, 0);
    row[0] = 1;
    for (int r = 1; r <= m; ++r) {
        for (int i = r; i > 0; --i) {
            row[i] = static_cast<std::uint8_t>(row[i] + row[i - 1]);
        }
    }
    return row;
}

FirState::FirState(int order)
    : order_(order),
      coeffs_(binomial_coeffs(order)),
      ring_(std::bit_ceil(static_cast<std::size_t>(order) + 1), 0),
      mask_(ring_.size() - 1),
      warmup_(order)
{
}

FirState::FirState(int order, std::span<const std::uint16_t> tail) : FirState(order)
{
    const std::size_t take = std::min<std::size_t>(tail.size(), static_cast<std::size_t>(order));
    for (std::size_t i = tail.size() - take; i < tail.size(); ++i) {
        if (tail[i] > 1023) throw InputError("FIR input out of range [0,1023]");
        ring_[head_] = static_cast<std::uint8_t>(tail[i]);
        head_ = (head_ + 1) & mask_;
        --warmup_;
    }
}

std::uint8_t FirState::push_and_filter(std::uint8_t x) noexcept
{
    ring_[head_] = x;
    // coeffs_[i] multiplies x(n-i), which sits i slots behind head_.
    unsigned acc = 0;
    for (int i = 0; i <= order_; ++i) {
        acc += unsigned{coeffs_[i]} * ring_[(head_ - static_cast<std::size_t>(i)) & mask_];
    }
    head_ = (head_ + 1) & mask_;
    return static_cast<std::uint8_t>(acc);
}

std::optional<std::uint8_t> FirState::next(std::uint16_t x)
{
    if (x > 1023) throw InputError("FIR input out of range [0,1023]: " + std::to_string(x));
    const std::uint8_t y = push_and_filter(static_cast<std::uint8_t>(x));
    if (warmup_ > 0) {
        --warmup_;
        return std::nullopt;
    }
    return y;
}

void FirState::process(std::span<const std::uint16_t> xs, std::vector<std::uint8_t>& out)
{
    std::size_t i = 0;
    for (; i < xs.size() && warmup_ > 0; ++i) {
        (void)next(xs[i]);
    }
    out.reserve(out.size() + (xs.size() - i));
    for (; i < xs.size(); ++i) {
        if (xs[i] > 1023) throw InputError("FIR input out of range [0,1023]: " + std::to_string(xs[i]));
        out.push_back(push_and_filter(static_cast<std::uint8_t>(xs[i])));
    }
}

std::vector<std::uint8_t> FirState::process(std::span<const std::uint16_t> xs)
{
    std::vector<std::uint8_t> out;
    process(xs, out);
    return out;
}

std::vector<std::uint8_t> FirState::history() const
{
    const std::size_t have = static_cast<std::size_t>(order_ - warmup_);
    std::vector<std::uint8_t> h(have);
    for (std::size_t k = 0; k < have; ++k) {
        h[k] = ring_[(head_ - have + k) & mask_];
    }
    return h;
}

namespace {

double lag1_correlation(std::span<const std::uint8_t> y)
{
    if (y.size() < 3) return 0.0;
    const std::size_t n = y.size() - 1;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = y[i], b = y[i + 1];
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    const double dn = static_cast<double>(n);
    const double cov = sxy - sx * sy / dn;
    const double vx = sxx - sx * sx / dn;
    const double vy = syy - sy * sy / dn;
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

}  // namespace

FirCalibrationResult calibrate_fir_order(std::span<const std::uint16_t> source,
                                         std::span<const int> candidates, std::size_t min_stream)
{
    if (candidates.empty()) throw ConfigError("calibrate_fir_order: no candidate orders");
    if (source.size() < min_stream) {
        throw InsufficientSampleError("calibrate_fir_order: stream shorter than " +
                                      std::to_string(min_stream) + " samples");
    }
    FirCalibrationResult result;
    for (int m : candidates) {
        FirState fir(m);
        const auto bytes = fir.process(source);
        Histogram h(256);
        h.update(bytes);
        FirCalibrationCandidate c;
        c.order = m;
        c.degenerate = h.bins()[0] == h.total();
        c.uniformity_p = c.degenerate ? 0.0 : uniform_chi_square_p(h);
        c.serial_r = lag1_correlation(bytes);
        c.serial_bound = 4.0 / std::sqrt(static_cast<double>(bytes.size()));
        c.passed = !c.degenerate && c.uniformity_p > 0.01 && std::abs(c.serial_r) < c.serial_bound;
        result.candidates.push_back(c);
        if (c.passed && result.chosen_order == 0) {
            result.chosen_order = m;
            break;
        }
    }
    if (result.chosen_order == 0) {
        std::ostringstream os;
        os << "FIR calibration failed:";
        for (const auto& c : result.candidates) {
            os << " [M=" << c.order << " p=" << c.uniformity_p << " r=" << c.serial_r
               << (c.degenerate ? " degenerate" : "") << "]";
        }
        throw CalibrationError(os.str());
    }
    return result;
}

}  // namespace qrng
