#pragma once

// Simulated generation chain: random optical phase, two-path interference,
// additive detection noise and a 10-bit ADC, plus laser telemetry.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrng/rng.hpp"

namespace qrng {

inline constexpr int kAdcBits = 10;
inline constexpr int kAdcMax = (1 << kAdcBits) - 1;  // 1023
inline constexpr int kAdcLevels = 1 << kAdcBits;     // 1024

enum class FaultKind {
    power_drift,        // value: relative drift, percent per simulated day
    saturation,         // value: extra multiplicative gain on the fringe
    background_light,   // value: code offset added to background samples
    stuck_adc_bit,      // bit_index, value (0 or 1)
    phase_correlation,  // value: probability a pulse inherits the previous phase
};

struct FaultSpec {
    FaultKind kind = FaultKind::power_drift;
    double value = 0.0;
    int bit_index = 0;
    std::uint64_t start_sample = 0;
    std::uint64_t duration = 0;

    bool active_at(std::uint64_t sample) const noexcept
    {
        return sample >= start_sample && sample - start_sample < duration;
    }
    bool overlaps(std::uint64_t first, std::uint64_t count) const noexcept
    {
        return count > 0 && duration > 0 && first < start_sample + duration &&
               start_sample < first + count;
    }
};

struct SourceConfig {
    std::uint64_t seed = 1;
    double visibility = 1.0;
    double gain = 1.0;
    double offset = 0.0;
    double noise_sigma = 0.0;
    double bg_offset = 12.0;
    double bg_sigma = 2.0;
    int adc_bits = kAdcBits;
    double pulse_rate_hz = 1.0e9;
    double power_nominal_mw = 5.03;
    double power_rel_sigma = 0.002;
    double temp_setpoint_c = 25.0;
    double temp_sigma_c = 0.33;
    std::vector<FaultSpec> faults;

    // Throws ConfigError when an invariant does not hold.
    void validate() const;
};

// Ideal source: unit visibility, full-scale fringe, no noise.
SourceConfig ideal_arcsine_config(std::uint64_t seed = 1);

struct RawFrame {
    std::vector<std::uint16_t> foreground;  // raw samples X
    std::vector<std::uint16_t> background;
};

double sample_phase(CounterRng& rng) noexcept;

// v = (1 + V cos(phase)) / 2
double interference_intensity(double phase, const SourceConfig& cfg) noexcept;

// Deterministic part of the ADC: clamp(floor(offset + gain*1024*v + noise),
// 0, 1023), i.e. a 1024-LSB full scale.
// `sample` selects which faults are active.
int adc_quantize(double v, double noise, const SourceConfig& cfg,
                 std::uint64_t sample = 0) noexcept;

// Draws the detection noise from `rng`.
int adc_quantize(double v, const SourceConfig& cfg, CounterRng& rng,
                 std::uint64_t sample = 0) noexcept;

// n foreground/background pairs for block `block_index`; global sample
// indices are block_index * n + i.
RawFrame generate_frame(const SourceConfig& cfg, std::size_t n, std::uint64_t block_index);

// Same, with an explicit global index of the first sample, for callers that
// use blocks of varying size.
RawFrame generate_frame_at(const SourceConfig& cfg, std::size_t n, std::uint64_t block_index,
                           std::uint64_t first_sample);

// Binary dump: little-endian uint16, F,B,F,B,...
std::vector<std::uint8_t> encode_frame(const RawFrame& frame);
RawFrame decode_frame(std::span<const std::uint8_t> bytes);

struct LaserTelemetry {
    std::uint64_t step = 0;
    std::uint64_t sample = 0;  // global sample index of this reading
    std::string timestamp;
    double power_mw = 0.0;
    double temperature_c = 0.0;
};

// AR(1) power and temperature processes with a one-day correlation time.
// Relative power deviation and temperature deviation are stationary with
// the configured standard deviations; an active power_drift fault adds a
// linear ramp that persists once the fault window ends.
class TelemetryModel {
public:
    TelemetryModel(const SourceConfig& cfg, std::uint32_t steps_per_day,
                   std::uint64_t samples_per_day);

    LaserTelemetry step();

    std::uint64_t steps_taken() const noexcept { return step_; }
    std::uint32_t steps_per_day() const noexcept { return steps_per_day_; }

private:
    double drift_fraction(std::uint64_t sample) const noexcept;

    SourceConfig cfg_;
    std::uint32_t steps_per_day_;
    std::uint64_t samples_per_day_;
    double phi_;
    std::uint64_t step_ = 0;
    double power_dev_ = 0.0;  // relative
    double temp_dev_ = 0.0;   // degrees C
};

std::string telemetry_csv_header();
std::string telemetry_csv_row(const LaserTelemetry& t);

}  // namespace qrng
