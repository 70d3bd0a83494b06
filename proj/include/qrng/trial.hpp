#pragma once

// Long-run trial: per simulated day, laser telemetry, a number of battery
// runs on fresh post-filter data, health checks and alarms. Every day is
// appended to the output directory and checkpointed, so an interrupted
// trial resumes from the last completed day with identical results.

#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "qrng/config.hpp"
#include "qrng/meta_ledger.hpp"
#include "qrng/report.hpp"
#include "qrng/sp800_22.hpp"

namespace qrng {

struct TrialOptions {
    unsigned workers = 1;
    // Stop (checkpointed, no report) once this many days are complete.
    std::optional<int> halt_after_days;
    // Also write runs/run_NNNNNN.json with every per-substring p-value.
    bool keep_run_reports = false;
    std::function<void(int day, int days)> on_day;
};

struct TrialResult {
    int days_completed = 0;
    bool resumed = false;
    bool finished = false;
    std::size_t alarms = 0;
    std::string config_hash;
    nlohmann::json report;  // null unless finished
};

// Thrown when an existing checkpoint belongs to a different config.
class ResumeMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ledger records for one battery run: the uniformity p-value of every
// family that has one.
std::vector<PValueRecord> ledger_records(const sp800_22::RunResult& run, const std::string& timestamp,
                                         std::int64_t run_id);
std::vector<RatioRecord> ratio_records(const sp800_22::RunResult& run, const std::string& timestamp,
                                       std::int64_t run_id);

// Family name as used in ledger rows: "Test" or "Test/label".
std::string family_name(const sp800_22::FamilyResult& f);

TrialResult run_trial(const TrialConfig& cfg, const std::string& out_dir, const TrialOptions& options = {});

}  // namespace qrng
