#include "qrng/monitor.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/stats.hpp"

namespace qrng {

void AlarmThresholds::validate() const
{
    if (!(power_rel_band > 0.0) || !(bg_mean_band > 0.0)) throw ConfigError("alarm bands must be positive");
    if (!(postfir_gof_floor > 0.0 && postfir_gof_floor < 1.0)) throw ConfigError("postfir_gof_floor must be in (0,1)");
    if (postfir_consecutive < 1) throw ConfigError("postfir_consecutive must be >= 1");
}

std::string to_string(AlarmKind kind)
{
    switch (kind) {
    case AlarmKind::power: return "power";
    case AlarmKind::shannon_entropy: return "shannon_entropy";
    case AlarmKind::min_entropy: return "min_entropy";
    case AlarmKind::background_mean: return "background_mean";
    case AlarmKind::postfir_uniformity: return "postfir_uniformity";
    }
    return "unknown";
}

HealthCheck make_health_check(std::string timestamp, const Histogram& foreground,
                              const Histogram& background, const Histogram& postfir)
{
    HealthCheck c;
    c.timestamp = std::move(timestamp);
    c.entropy = entropy_report(foreground);
    c.background_mean = background.mean();
    c.postfir_p = uniform_chi_square_p(postfir);
    return c;
}

AlarmMonitor::AlarmMonitor(double power_nominal_mw, double background_expected, AlarmThresholds thresholds)
    : power_nominal_(power_nominal_mw), bg_expected_(background_expected), thresholds_(thresholds)
{
    thresholds_.validate();
}

std::optional<AlarmEvent> AlarmMonitor::observe(const LaserTelemetry& t)
{
    const double rel = t.power_mw / power_nominal_ - 1.0;
    if (std::abs(rel) > thresholds_.power_rel_band) {
        return AlarmEvent{AlarmKind::power, t.timestamp, t.power_mw,
                          power_nominal_ * (1.0 + std::copysign(thresholds_.power_rel_band, rel))};
    }
    return std::nullopt;
}

std::vector<AlarmEvent> AlarmMonitor::observe(const HealthCheck& c)
{
    std::vector<AlarmEvent> out;
    if (c.entropy.shannon_bits < thresholds_.entropy_floor_shannon) {
        out.push_back({AlarmKind::shannon_entropy, c.timestamp, c.entropy.shannon_bits,
                       thresholds_.entropy_floor_shannon});
    }
    if (c.entropy.min_entropy_bits < thresholds_.entropy_floor_min) {
        out.push_back({AlarmKind::min_entropy, c.timestamp, c.entropy.min_entropy_bits,
                       thresholds_.entropy_floor_min});
    }
    if (std::abs(c.background_mean - bg_expected_) > thresholds_.bg_mean_band) {
        out.push_back({AlarmKind::background_mean, c.timestamp, c.background_mean,
                       bg_expected_ + std::copysign(thresholds_.bg_mean_band, c.background_mean - bg_expected_)});
    }
    if (c.postfir_p < thresholds_.postfir_gof_floor) {
        if (++postfir_streak_ == thresholds_.postfir_consecutive) {
            out.push_back({AlarmKind::postfir_uniformity, c.timestamp, c.postfir_p,
                           thresholds_.postfir_gof_floor});
            postfir_streak_ = 0;
        }
    } else {
        postfir_streak_ = 0;
    }
    return out;
}

std::vector<AlarmEvent> evaluate_alarms(std::span<const LaserTelemetry> telemetry,
                                        std::span<const HealthCheck> checks, const SourceConfig& cfg,
                                        const AlarmThresholds& thresholds)
{
    if (telemetry.empty() && checks.empty()) throw InputError("evaluate_alarms: empty window");
    AlarmMonitor monitor(cfg.power_nominal_mw, cfg.bg_offset, thresholds);
    std::vector<AlarmEvent> events;
    for (const auto& t : telemetry) {
        if (auto e = monitor.observe(t)) events.push_back(*e);
    }
    for (const auto& c : checks) {
        auto e = monitor.observe(c);
        events.insert(events.end(), e.begin(), e.end());
    }
    return events;
}

TelemetryAggregate aggregate(std::span<const LaserTelemetry> readings)
{
    TelemetryAggregate a;
    a.readings = readings.size();
    if (readings.empty()) return a;
    a.power_min = a.power_max = readings.front().power_mw;
    double t2 = 0.0;
    for (const auto& r : readings) {
        a.power_mean += r.power_mw;
        a.temperature_mean += r.temperature_c;
        t2 += r.temperature_c * r.temperature_c;
        a.power_min = std::min(a.power_min, r.power_mw);
        a.power_max = std::max(a.power_max, r.power_mw);
    }
    const double n = static_cast<double>(readings.size());
    a.power_mean /= n;
    a.temperature_mean /= n;
    a.temperature_std = std::sqrt(std::max(0.0, t2 / n - a.temperature_mean * a.temperature_mean));
    return a;
}

nlohmann::json to_json(const AlarmEvent& e)
{
    return {{"kind", to_string(e.kind)}, {"timestamp", e.timestamp}, {"observed", e.observed},
            {"threshold", e.threshold}};
}

nlohmann::json to_json(const EntropyReport& r)
{
    return {{"shannon_bits", r.shannon_bits},
            {"min_entropy_bits", r.min_entropy_bits},
            {"per_bit_shannon", r.per_bit_shannon},
            {"per_bit_min_entropy", r.per_bit_min}};
}

nlohmann::json to_json(const TelemetryAggregate& a)
{
    return {{"readings", a.readings},        {"power_mw_mean", a.power_mean},
            {"power_mw_min", a.power_min},   {"power_mw_max", a.power_max},
            {"temperature_c_mean", a.temperature_mean}, {"temperature_c_std", a.temperature_std}};
}

nlohmann::json to_json(const HealthSnapshot& s)
{
    nlohmann::json alarms = nlohmann::json::array();
    for (const auto& a : s.alarms) alarms.push_back(to_json(a));
    nlohmann::json j{
        {"timestamp", s.timestamp},
        {"histograms",
         {{"foreground", s.foreground.bins()}, {"background", s.background.bins()}, {"postfir", s.postfir.bins()}}},
        {"entropy", to_json(s.entropy)},
        {"postfir_uniformity_p", s.postfir_p},
        {"background_mean", s.background_mean},
        {"telemetry", to_json(s.telemetry)},
        {"alarms", alarms},
    };
    j["foreground_gof_p"] = s.foreground_gof_p ? nlohmann::json(*s.foreground_gof_p) : nlohmann::json(nullptr);
    return j;
}

std::string daily_csv_header() { return "day,power_mw_mean,shannon_bits,min_entropy_bits"; }

std::string daily_csv_row(const DailyAggregate& d)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f", d.day, d.power_mw_mean, d.shannon_bits,
                  d.min_entropy_bits);
    return buf;
}

std::vector<DailyAggregate> parse_daily_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::vector<DailyAggregate> out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != daily_csv_header()) throw InputError("daily CSV: unexpected header at line 1");
            continue;
        }
        DailyAggregate d;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf%c", &d.day, &d.power_mw_mean, &d.shannon_bits,
                        &d.min_entropy_bits, &tail) != 4) {
            throw InputError("daily CSV: malformed row at line " + std::to_string(lineno));
        }
        out.push_back(d);
    }
    return out;
}

}  // namespace qrng
