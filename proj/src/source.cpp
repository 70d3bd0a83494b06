#include "qrng/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/sim_clock.hpp"

namespace qrng {
namespace {

// Background samples: nearest code.
int clamp_code(double x) noexcept
{
    if (!(x > 0.0)) return 0;  // also catches NaN
    const double r = std::round(x);
    return r >= kAdcMax ? kAdcMax : static_cast<int>(r);
}

// Foreground transfer: full scale spans 1024 LSBs and code k collects
// inputs in [k, k+1), so an ideal fringe lands exactly on the discretized
// arcsine law.
int quantize_code(double x) noexcept
{
    if (!(x >= 1.0)) return 0;
    return x >= kAdcMax ? kAdcMax : static_cast<int>(x);
}

std::vector<FaultSpec> faults_in(const SourceConfig& cfg, std::uint64_t first, std::uint64_t n)
{
    std::vector<FaultSpec> out;
    for (const auto& f : cfg.faults) {
        if (f.overlaps(first, n)) out.push_back(f);
    }
    return out;
}

}  // namespace

void SourceConfig::validate() const
{
    if (adc_bits != kAdcBits) throw ConfigError("adc_bits must be 10");
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw ConfigError("visibility must lie in [0,1]");
    if (!(gain > 0.0)) throw ConfigError("gain must be positive");
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
    if (!(bg_sigma >= 0.0)) throw ConfigError("bg_sigma must be non-negative");
    if (!std::isfinite(offset) || !std::isfinite(bg_offset)) throw ConfigError("offsets must be finite");
    if (!std::isfinite(gain * kAdcLevels + offset)) throw ConfigError("gain*1024 + offset not representable");
    if (!(power_nominal_mw > 0.0)) throw ConfigError("power_nominal_mw must be positive");
    if (!(power_rel_sigma >= 0.0) || !(temp_sigma_c >= 0.0)) throw ConfigError("telemetry sigmas must be non-negative");
    for (const auto& f : faults) {
        switch (f.kind) {
        case FaultKind::stuck_adc_bit:
            if (f.bit_index < 0 || f.bit_index >= kAdcBits) throw ConfigError("stuck_adc_bit: bit_index must be in [0,9]");
            if (f.value != 0.0 && f.value != 1.0) throw ConfigError("stuck_adc_bit: value must be 0 or 1");
            break;
        case FaultKind::phase_correlation:
            if (!(f.value >= 0.0 && f.value < 1.0)) throw ConfigError("phase_correlation: coefficient must be in [0,1)");
            break;
        case FaultKind::saturation:
            if (!(f.value > 0.0)) throw ConfigError("saturation: extra_gain must be positive");
            break;
        case FaultKind::power_drift:
        case FaultKind::background_light:
            if (!std::isfinite(f.value)) throw ConfigError("fault value must be finite");
            break;
        }
    }
}

SourceConfig ideal_arcsine_config(std::uint64_t seed)
{
    SourceConfig cfg;
    cfg.seed = seed;
    cfg.visibility = 1.0;
    cfg.gain = 1.0;
    cfg.offset = 0.0;
    cfg.noise_sigma = 0.0;
    return cfg;
}

double sample_phase(CounterRng& rng) noexcept
{
    return 2.0 * std::numbers::pi * rng.uniform();
}

double interference_intensity(double phase, const SourceConfig& cfg) noexcept
{
    return 0.5 * (1.0 + cfg.visibility * std::cos(phase));
}

int adc_quantize(double v, double noise, const SourceConfig& cfg, std::uint64_t sample) noexcept
{
    double gain = cfg.gain;
    for (const auto& f : cfg.faults) {
        if (f.kind == FaultKind::saturation && f.active_at(sample)) gain *= f.value;
    }
    int code = quantize_code(cfg.offset + gain * kAdcLevels * v + noise);
    for (const auto& f : cfg.faults) {
        if (f.kind == FaultKind::stuck_adc_bit && f.active_at(sample)) {
            const int mask = 1 << f.bit_index;
            code = f.value != 0.0 ? (code | mask) : (code & ~mask);
        }
    }
    return code;
}

int adc_quantize(double v, const SourceConfig& cfg, CounterRng& rng, std::uint64_t sample) noexcept
{
    const double noise = cfg.noise_sigma > 0.0 ? cfg.noise_sigma * rng.normal() : 0.0;
    return adc_quantize(v, noise, cfg, sample);
}

RawFrame generate_frame(const SourceConfig& cfg, std::size_t n, std::uint64_t block_index)
{
    return generate_frame_at(cfg, n, block_index, block_index * n);
}

RawFrame generate_frame_at(const SourceConfig& cfg, std::size_t n, std::uint64_t block_index,
                           std::uint64_t first_sample)
{
    cfg.validate();
    if (n == 0) throw InputError("generate_frame: n must be positive");

    RawFrame frame;
    frame.foreground.resize(n);
    frame.background.resize(n);

    const auto active = faults_in(cfg, first_sample, n);
    const double scale = cfg.gain * kAdcLevels;
    const double two_pi = 2.0 * std::numbers::pi;

    if (active.empty()) {
        const double half_v = 0.5 * cfg.visibility;
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = draw_bits(cfg.seed, Stream::source, block_index, i);
            const double phase = two_pi * to_unit53(b[0], b[1]);
            const auto z = box_muller(b[2], b[3]);
            const double v = 0.5 + half_v * std::cos(phase);
            frame.foreground[i] = static_cast<std::uint16_t>(
                quantize_code(cfg.offset + scale * v + cfg.noise_sigma * z[0]));
            frame.background[i] = static_cast<std::uint16_t>(
                clamp_code(cfg.bg_offset + cfg.bg_sigma * z[1]));
        }
        return frame;
    }

    SourceConfig local = cfg;
    local.faults = active;
    double prev_phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t sample = first_sample + i;
        const auto b = draw_bits(cfg.seed, Stream::source, block_index, i);
        double phase = two_pi * to_unit53(b[0], b[1]);
        double bg_extra = 0.0;
        for (const auto& f : active) {
            if (!f.active_at(sample)) continue;
            if (f.kind == FaultKind::phase_correlation && i > 0) {
                const auto u = draw_bits(cfg.seed, Stream::fault, block_index, i);
                if (to_unit53(u[0], u[1]) < f.value) phase = prev_phase;
            } else if (f.kind == FaultKind::background_light) {
                bg_extra += f.value;
            }
        }
        prev_phase = phase;
        const auto z = box_muller(b[2], b[3]);
        const double v = interference_intensity(phase, cfg);
        frame.foreground[i] =
            static_cast<std::uint16_t>(adc_quantize(v, cfg.noise_sigma * z[0], local, sample));
        frame.background[i] =
            static_cast<std::uint16_t>(clamp_code(cfg.bg_offset + bg_extra + cfg.bg_sigma * z[1]));
    }
    return frame;
}

std::vector<std::uint8_t> encode_frame(const RawFrame& frame)
{
    if (frame.foreground.size() != frame.background.size()) {
        throw InputError("frame foreground/background lengths differ");
    }
    std::vector<std::uint8_t> out;
    out.reserve(frame.foreground.size() * 4);
    auto put = [&out](std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v & 0xFF));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    };
    for (std::size_t i = 0; i < frame.foreground.size(); ++i) {
        put(frame.foreground[i]);
        put(frame.background[i]);
    }
    return out;
}

RawFrame decode_frame(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() % 4 != 0) throw InputError("raw frame dump length must be a multiple of 4");
    RawFrame frame;
    const std::size_t n = bytes.size() / 4;
    frame.foreground.resize(n);
    frame.background.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto* p = bytes.data() + 4 * i;
        const auto f = static_cast<std::uint16_t>(p[0] | p[1] << 8);
        const auto g = static_cast<std::uint16_t>(p[2] | p[3] << 8);
        if (f > kAdcMax || g > kAdcMax) throw InputError("raw frame code out of range");
        frame.foreground[i] = f;
        frame.background[i] = g;
    }
    return frame;
}

TelemetryModel::TelemetryModel(const SourceConfig& cfg, std::uint32_t steps_per_day,
                               std::uint64_t samples_per_day)
    : cfg_(cfg), steps_per_day_(steps_per_day), samples_per_day_(samples_per_day)
{
    cfg_.validate();
    if (steps_per_day_ == 0) throw ConfigError("telemetry steps_per_day must be positive");
    // One-day correlation time.
    phi_ = std::exp(-1.0 / static_cast<double>(steps_per_day_));
    // Start from the stationary law so early days are not special.
    CounterRng init(cfg_.seed, Stream::telemetry, 1);
    power_dev_ = cfg_.power_rel_sigma * init.normal();
    temp_dev_ = cfg_.temp_sigma_c * init.normal();
}

double TelemetryModel::drift_fraction(std::uint64_t sample) const noexcept
{
    double total = 0.0;
    const double spd = static_cast<double>(std::max<std::uint64_t>(samples_per_day_, 1));
    for (const auto& f : cfg_.faults) {
        if (f.kind != FaultKind::power_drift || sample < f.start_sample) continue;
        const std::uint64_t elapsed = std::min(sample - f.start_sample, f.duration);
        total += f.value / 100.0 * static_cast<double>(elapsed) / spd;
    }
    return total;
}

LaserTelemetry TelemetryModel::step()
{
    const auto b = draw_bits(cfg_.seed, Stream::telemetry, 0, step_);
    const auto z = box_muller(b[0], b[1]);
    const double innov = std::sqrt(1.0 - phi_ * phi_);
    power_dev_ = phi_ * power_dev_ + cfg_.power_rel_sigma * innov * z[0];
    temp_dev_ = phi_ * temp_dev_ + cfg_.temp_sigma_c * innov * z[1];

    // Reading at the end of the step interval.
    const std::uint64_t end_num = (step_ + 1) * samples_per_day_;
    LaserTelemetry t;
    t.step = step_;
    t.sample = end_num / steps_per_day_;
    const double day = static_cast<double>(step_ + 1) / steps_per_day_;
    t.timestamp = sim_timestamp(day);
    t.power_mw = cfg_.power_nominal_mw * (1.0 + power_dev_ + drift_fraction(t.sample));
    t.temperature_c = cfg_.temp_setpoint_c + temp_dev_;
    ++step_;
    return t;
}

std::string telemetry_csv_header() { return "timestamp,power_mw,temperature_c"; }

std::string telemetry_csv_row(const LaserTelemetry& t)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.4f", t.timestamp.c_str(), t.power_mw, t.temperature_c);
    return buf;
}

}  // namespace qrng
