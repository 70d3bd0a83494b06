#pragma once

// Live health monitoring: alarm rules over telemetry and periodic
// histogram checks, and the JSON/CSV documents the monitor emits.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrng/health.hpp"
#include "qrng/histogram.hpp"
#include "qrng/source.hpp"

namespace qrng {

struct AlarmThresholds {
    double power_rel_band = 0.025;
    double entropy_floor_shannon = 9.0;
    double entropy_floor_min = 8.0;
    double bg_mean_band = 2.0;
    double postfir_gof_floor = 1e-4;
    int postfir_consecutive = 3;

    void validate() const;
};

enum class AlarmKind { power, shannon_entropy, min_entropy, background_mean, postfir_uniformity };

std::string to_string(AlarmKind kind);

struct AlarmEvent {
    AlarmKind kind = AlarmKind::power;
    std::string timestamp;
    double observed = 0.0;
    double threshold = 0.0;
};

// One periodic evaluation of the monitor histograms.
struct HealthCheck {
    std::string timestamp;
    EntropyReport entropy;
    double background_mean = 0.0;
    double postfir_p = 1.0;
};

HealthCheck make_health_check(std::string timestamp, const Histogram& foreground,
                              const Histogram& background, const Histogram& postfir);

// Stateful rule evaluation; the post-filter rule needs a run of consecutive
// failing checks, so the monitor keeps that streak between calls.
class AlarmMonitor {
public:
    AlarmMonitor(double power_nominal_mw, double background_expected, AlarmThresholds thresholds = {});

    std::optional<AlarmEvent> observe(const LaserTelemetry& t);
    std::vector<AlarmEvent> observe(const HealthCheck& check);

    const AlarmThresholds& thresholds() const noexcept { return thresholds_; }

    // Consecutive failing post-filter checks so far; restored on resume.
    int postfir_streak() const noexcept { return postfir_streak_; }
    void set_postfir_streak(int n) noexcept { postfir_streak_ = n; }

private:
    double power_nominal_;
    double bg_expected_;
    AlarmThresholds thresholds_;
    int postfir_streak_ = 0;
};

// Telemetry readings first, then checks, in order. Throws InputError when
// both sequences are empty.
std::vector<AlarmEvent> evaluate_alarms(std::span<const LaserTelemetry> telemetry,
                                        std::span<const HealthCheck> checks,
                                        const SourceConfig& cfg, const AlarmThresholds& thresholds = {});

struct TelemetryAggregate {
    std::size_t readings = 0;
    double power_mean = 0.0;
    double power_min = 0.0;
    double power_max = 0.0;
    double temperature_mean = 0.0;
    double temperature_std = 0.0;
};

TelemetryAggregate aggregate(std::span<const LaserTelemetry> readings);

struct HealthSnapshot {
    std::string timestamp;
    Histogram foreground{1024};
    Histogram background{1024};
    Histogram postfir{256};
    EntropyReport entropy;
    std::optional<double> foreground_gof_p;
    double postfir_p = 1.0;
    double background_mean = 0.0;
    TelemetryAggregate telemetry;
    std::vector<AlarmEvent> alarms;
};

nlohmann::json to_json(const AlarmEvent& e);
nlohmann::json to_json(const EntropyReport& r);
nlohmann::json to_json(const TelemetryAggregate& a);
nlohmann::json to_json(const HealthSnapshot& s);

struct DailyAggregate {
    int day = 0;
    double power_mw_mean = 0.0;
    double shannon_bits = 0.0;
    double min_entropy_bits = 0.0;
};

std::string daily_csv_header();
std::string daily_csv_row(const DailyAggregate& d);
// Throws InputError with the offending line number.
std::vector<DailyAggregate> parse_daily_csv(const std::string& text);

}  // namespace qrng
