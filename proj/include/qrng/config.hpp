#pragma once

// JSON configuration files and their content hash.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "qrng/monitor.hpp"
#include "qrng/source.hpp"
#include "qrng/sp800_22.hpp"

namespace qrng {

struct TrialConfig {
    SourceConfig source;
    int fir_order = 7;
    sp800_22::BatteryParams battery = sp800_22::BatteryParams::desk_scale();
    int days = 71;
    int runs_per_day = 10;
    std::uint32_t telemetry_steps_per_day = 24;
    AlarmThresholds thresholds;

    // Throws ConfigError.
    void validate() const;
    std::size_t bytes_per_run() const;
    std::uint64_t samples_per_run() const { return bytes_per_run() + static_cast<std::uint64_t>(fir_order); }
};

nlohmann::json to_json(const SourceConfig& c);
nlohmann::json to_json(const FaultSpec& f);
nlohmann::json to_json(const AlarmThresholds& t);
nlohmann::json to_json(const TrialConfig& c);

// Missing keys keep their defaults; unknown keys and wrong types throw
// ConfigError.
SourceConfig source_from_json(const nlohmann::json& j);
FaultSpec fault_from_json(const nlohmann::json& j);
TrialConfig trial_from_json(const nlohmann::json& j);

std::string to_string(FaultKind k);
FaultKind fault_kind_from_string(const std::string& s);

// Reads and validates a JSON config file. Throws ConfigError.
TrialConfig load_trial_config(const std::string& path);

// FNV-1a 64 over the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string content_hash(const nlohmann::json& j);

}  // namespace qrng
