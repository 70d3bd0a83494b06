#pragma once

// Long-run meta-analysis over p-value streams: binomial acceptance ranges,
// out-of-range counts, windowed counts and extreme-value scans, plus the
// append-only CSV ledger the trials write.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qrng {

struct PValueRecord {
    std::string timestamp;  // ISO-8601 UTC
    std::string battery;
    std::int64_t run_id = 0;
    std::string test_name;
    std::int64_t statistic_index = 0;
    double p = 0.0;

    bool operator==(const PValueRecord&) const = default;
};

// Closed range of p-values.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Closed range of counts.
struct CountInterval {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    bool contains(std::uint64_t n) const noexcept { return n >= lo && n <= hi; }
    bool operator==(const CountInterval&) const = default;
};

// Gaussian approximation to Binomial(n, alpha): round(n*alpha -/+ k*sigma),
// half away from zero, clamped to [0, n]. Throws ConfigError on bad input.
CountInterval acceptance_interval(std::uint64_t n, double alpha, double k_sigma = 3.0);

std::uint64_t count_outside(std::span<const PValueRecord> records, Interval interval);
std::uint64_t count_outside(std::span<const double> p_values, Interval interval);

struct WindowedCounts {
    std::size_t window_size = 0;
    std::vector<std::uint64_t> counts;  // complete windows first, then any remainder
    bool last_partial = false;
    double mean = 0.0;                  // over complete windows only
};

// Consecutive non-overlapping windows in record order. Throws ConfigError
// when window_size is zero.
WindowedCounts windowed_nout(std::span<const PValueRecord> records, std::size_t window_size,
                             Interval interval);

struct CatastrophicLevel {
    double epsilon = 0.0;
    std::uint64_t count = 0;
    CountInterval acceptance;
    bool accepted = true;
};

// For each epsilon, counts p outside [eps, 1-eps] and checks the count
// against acceptance_interval(N, 2*eps). Throws ConfigError for eps outside
// (0, 0.5).
std::vector<CatastrophicLevel> catastrophic_scan(std::span<const PValueRecord> records,
                                                 std::span<const double> epsilons);

inline constexpr double kDefaultCatastrophicEpsilons[] = {1e-5, 1e-6};

// Per-battery conventions: the "good" p-value range, the implied per-value
// failure probability, the expected count per run and the window size.
struct BatteryProfile {
    std::string name;
    Interval interval;
    double alpha = 0.0;
    std::size_t per_run = 0;
    std::size_t window = 0;
};

BatteryProfile bigcrush_profile();
BatteryProfile sp800_22_profile();
// Throws ConfigError for unknown names.
BatteryProfile profile_by_name(const std::string& name);

// ---- CSV ledger ----

std::string ledger_csv_header();
// p is written with 17 significant digits so reading it back is exact.
std::string ledger_csv_row(const PValueRecord& r);

// Parses a whole ledger file. Rejects malformed rows, p outside [0,1] and
// duplicate (battery, run_id, test_name, statistic_index) keys; the
// InputError message lists the offending line numbers.
std::vector<PValueRecord> parse_ledger_csv(const std::string& text);

std::vector<PValueRecord> read_ledger(const std::string& path);
// Appends rows, writing the header first when the file is new or empty.
void append_ledger(const std::string& path, std::span<const PValueRecord> records);

struct IngestReport {
    std::size_t records = 0;
    std::size_t runs = 0;
    std::vector<std::string> warnings;
};

// Checks per-run counts against the profile; deviations are warnings.
IngestReport validate_ingest(std::span<const PValueRecord> records, const BatteryProfile& profile);

nlohmann::json to_json(const CountInterval& c);
nlohmann::json to_json(const WindowedCounts& w);
nlohmann::json to_json(const CatastrophicLevel& c);

}  // namespace qrng
