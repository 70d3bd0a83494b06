#include "qrng/config.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/fir.hpp"

namespace qrng {

namespace {

using nlohmann::json;

void check_keys(const json& j, const char* what, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
    }
}

template <typename T>
void field(const json& j, const char* what, const char* key, T& out)
{
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string(what) + "." + key + ": wrong type");
    }
}

struct FaultName {
    FaultKind kind;
    const char* name;
};

constexpr FaultName kFaultNames[] = {
    {FaultKind::power_drift, "power_drift"},
    {FaultKind::saturation, "saturation"},
    {FaultKind::background_light, "background_light"},
    {FaultKind::stuck_adc_bit, "stuck_adc_bit"},
    {FaultKind::phase_correlation, "phase_correlation"},
};

}  // namespace

std::string to_string(FaultKind k)
{
    for (const auto& f : kFaultNames) {
        if (f.kind == k) return f.name;
    }
    return "unknown";
}

FaultKind fault_kind_from_string(const std::string& s)
{
    for (const auto& f : kFaultNames) {
        if (s == f.name) return f.kind;
    }
    throw ConfigError("unknown fault kind '" + s + "'");
}

void TrialConfig::validate() const
{
    source.validate();
    battery.validate();
    thresholds.validate();
    if (fir_order < 1 || fir_order > kMaxFirOrder) throw ConfigError("fir_order must be in [1, 4096]");
    if (days < 1) throw ConfigError("trial length must be at least one day");
    if (runs_per_day < 1) throw ConfigError("runs_per_day must be at least 1");
    if (telemetry_steps_per_day < 1) throw ConfigError("telemetry_steps_per_day must be at least 1");
}

std::size_t TrialConfig::bytes_per_run() const
{
    return (battery.substring_len * battery.num_substrings + 7) / 8;
}

json to_json(const FaultSpec& f)
{
    return {{"kind", to_string(f.kind)},
            {"value", f.value},
            {"bit_index", f.bit_index},
            {"start_sample", f.start_sample},
            {"duration", f.duration}};
}

json to_json(const SourceConfig& c)
{
    json faults = json::array();
    for (const auto& f : c.faults) faults.push_back(to_json(f));
    return {{"seed", c.seed},
            {"visibility", c.visibility},
            {"gain", c.gain},
            {"offset", c.offset},
            {"noise_sigma", c.noise_sigma},
            {"bg_offset", c.bg_offset},
            {"bg_sigma", c.bg_sigma},
            {"adc_bits", c.adc_bits},
            {"pulse_rate_hz", c.pulse_rate_hz},
            {"power_nominal_mw", c.power_nominal_mw},
            {"power_rel_sigma", c.power_rel_sigma},
            {"temp_setpoint_c", c.temp_setpoint_c},
            {"temp_sigma_c", c.temp_sigma_c},
            {"faults", faults}};
}

json to_json(const AlarmThresholds& t)
{
    return {{"power_rel_band", t.power_rel_band},
            {"entropy_floor_shannon", t.entropy_floor_shannon},
            {"entropy_floor_min", t.entropy_floor_min},
            {"bg_mean_band", t.bg_mean_band},
            {"postfir_gof_floor", t.postfir_gof_floor},
            {"postfir_consecutive", t.postfir_consecutive}};
}

json to_json(const TrialConfig& c)
{
    return {{"source", to_json(c.source)},
            {"fir_order", c.fir_order},
            {"battery", sp800_22::to_json(c.battery)},
            {"schedule", {{"days", c.days}, {"runs_per_day", c.runs_per_day},
                          {"telemetry_steps_per_day", c.telemetry_steps_per_day}}},
            {"thresholds", to_json(c.thresholds)}};
}

FaultSpec fault_from_json(const json& j)
{
    check_keys(j, "fault", {"kind", "value", "bit_index", "start_sample", "duration"});
    FaultSpec f;
    std::string kind;
    field(j, "fault", "kind", kind);
    if (kind.empty()) throw ConfigError("fault: 'kind' is required");
    f.kind = fault_kind_from_string(kind);
    field(j, "fault", "value", f.value);
    field(j, "fault", "bit_index", f.bit_index);
    field(j, "fault", "start_sample", f.start_sample);
    f.duration = std::numeric_limits<std::uint64_t>::max() - f.start_sample;
    field(j, "fault", "duration", f.duration);
    return f;
}

SourceConfig source_from_json(const json& j)
{
    const char* w = "source";
    check_keys(j, w, {"seed", "visibility", "gain", "offset", "noise_sigma", "bg_offset", "bg_sigma", "adc_bits",
                      "pulse_rate_hz", "power_nominal_mw", "power_rel_sigma", "temp_setpoint_c", "temp_sigma_c",
                      "faults"});
    SourceConfig c;
    field(j, w, "seed", c.seed);
    field(j, w, "visibility", c.visibility);
    field(j, w, "gain", c.gain);
    field(j, w, "offset", c.offset);
    field(j, w, "noise_sigma", c.noise_sigma);
    field(j, w, "bg_offset", c.bg_offset);
    field(j, w, "bg_sigma", c.bg_sigma);
    field(j, w, "adc_bits", c.adc_bits);
    field(j, w, "pulse_rate_hz", c.pulse_rate_hz);
    field(j, w, "power_nominal_mw", c.power_nominal_mw);
    field(j, w, "power_rel_sigma", c.power_rel_sigma);
    field(j, w, "temp_setpoint_c", c.temp_setpoint_c);
    field(j, w, "temp_sigma_c", c.temp_sigma_c);
    if (const auto it = j.find("faults"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("source.faults: expected an array");
        for (const auto& f : *it) c.faults.push_back(fault_from_json(f));
    }
    c.validate();
    return c;
}

TrialConfig trial_from_json(const json& j)
{
    check_keys(j, "config", {"source", "fir_order", "battery", "schedule", "thresholds", "calibration"});
    TrialConfig c;
    if (const auto it = j.find("source"); it != j.end()) c.source = source_from_json(*it);
    field(j, "config", "fir_order", c.fir_order);
    if (const auto it = j.find("battery"); it != j.end()) {
        const char* w = "battery";
        check_keys(*it, w, {"substring_len", "num_substrings", "block_frequency_m", "template_m",
                            "non_overlapping_blocks", "overlapping_m", "overlapping_block", "serial_m",
                            "approximate_entropy_m", "linear_complexity_m", "alpha", "uniformity_floor"});
        auto& b = c.battery;
        field(*it, w, "substring_len", b.substring_len);
        field(*it, w, "num_substrings", b.num_substrings);
        field(*it, w, "block_frequency_m", b.block_frequency_m);
        field(*it, w, "template_m", b.template_m);
        field(*it, w, "non_overlapping_blocks", b.non_overlapping_blocks);
        field(*it, w, "overlapping_m", b.overlapping_m);
        field(*it, w, "overlapping_block", b.overlapping_block);
        field(*it, w, "serial_m", b.serial_m);
        field(*it, w, "approximate_entropy_m", b.approximate_entropy_m);
        field(*it, w, "linear_complexity_m", b.linear_complexity_m);
        field(*it, w, "alpha", b.alpha);
        field(*it, w, "uniformity_floor", b.uniformity_floor);
    }
    if (const auto it = j.find("schedule"); it != j.end()) {
        check_keys(*it, "schedule", {"days", "runs_per_day", "telemetry_steps_per_day"});
        field(*it, "schedule", "days", c.days);
        field(*it, "schedule", "runs_per_day", c.runs_per_day);
        field(*it, "schedule", "telemetry_steps_per_day", c.telemetry_steps_per_day);
    }
    if (const auto it = j.find("thresholds"); it != j.end()) {
        const char* w = "thresholds";
        check_keys(*it, w, {"power_rel_band", "entropy_floor_shannon", "entropy_floor_min", "bg_mean_band",
                            "postfir_gof_floor", "postfir_consecutive"});
        auto& t = c.thresholds;
        field(*it, w, "power_rel_band", t.power_rel_band);
        field(*it, w, "entropy_floor_shannon", t.entropy_floor_shannon);
        field(*it, w, "entropy_floor_min", t.entropy_floor_min);
        field(*it, w, "bg_mean_band", t.bg_mean_band);
        field(*it, w, "postfir_gof_floor", t.postfir_gof_floor);
        field(*it, w, "postfir_consecutive", t.postfir_consecutive);
    }
    c.validate();
    return c;
}

TrialConfig load_trial_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return trial_from_json(j);
}

std::string content_hash(const json& j)
{
    // nlohmann objects are key-sorted, so dump() is canonical.
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qrng
