#pragma once

// Long-run report: daily and windowed out-of-range counts per battery,
// weekly passing-ratio averages, catastrophic scans, and telemetry
// cross-references for anything that looks out of place.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrng/meta_ledger.hpp"
#include "qrng/monitor.hpp"
#include "qrng/source.hpp"

namespace qrng {

// One passing ratio of one test family in one battery run.
struct RatioRecord {
    std::string timestamp;
    std::int64_t run_id = 0;
    std::string test_name;
    std::int64_t statistic_index = 0;
    double ratio = 0.0;
    double threshold = 0.0;

    bool operator==(const RatioRecord&) const = default;
};

std::string ratio_csv_header();
std::string ratio_csv_row(const RatioRecord& r);
std::vector<RatioRecord> parse_ratio_csv(const std::string& text);

std::vector<LaserTelemetry> parse_telemetry_csv(const std::string& text);

std::string alarm_csv_header();
std::string alarm_csv_row(const AlarmEvent& e);
std::vector<AlarmEvent> parse_alarm_csv(const std::string& text);

struct ReportInputs {
    std::vector<PValueRecord> ledger;
    std::vector<RatioRecord> ratios;
    std::vector<LaserTelemetry> telemetry;
    std::vector<DailyAggregate> daily;
    std::vector<AlarmEvent> alarms;
    std::string config_hash;
};

struct DailyCount {
    std::string date;  // YYYY-MM-DD
    std::uint64_t records = 0;
    std::uint64_t n_out = 0;
    double expected = 0.0;
    std::uint64_t hi = 0;
};

struct WeeklyRatio {
    int week = 0;
    std::string test_name;
    std::size_t count = 0;
    double mean_ratio = 0.0;
    double mean_threshold = 0.0;
    bool passed = true;
};

std::vector<DailyCount> daily_nout(std::span<const PValueRecord> records, const BatteryProfile& profile);
std::vector<WeeklyRatio> weekly_ratios(std::span<const RatioRecord> ratios);

// Throws InputError when the ledger is empty.
nlohmann::json summarize(const ReportInputs& in);

// Writes report.json, fig5_daily_nout.csv (Big Crush), fig6_daily_nout.csv
// (SP 800-22) and fig7_weekly_ratios.csv into `dir`; returns the report.
nlohmann::json write_report(const std::string& dir, const ReportInputs& in);

// Loads whatever trial files exist in `dir` (ledger.csv is required).
ReportInputs load_report_inputs(const std::string& dir);

}  // namespace qrng
