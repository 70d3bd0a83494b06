#include "qrng/trial.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrng/bitstring.hpp"
#include "qrng/errors.hpp"
#include "qrng/health.hpp"
#include "qrng/monitor.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/sim_clock.hpp"
#include "qrng/stats.hpp"

namespace qrng {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TrackedFile {
    const char* name;
    const char* header;  // nullptr: no header line
};

const std::vector<TrackedFile>& tracked_files()
{
    static const std::string ledger = ledger_csv_header();
    static const std::string ratios = ratio_csv_header();
    static const std::string telemetry = telemetry_csv_header();
    static const std::string daily = daily_csv_header();
    static const std::string alarms = alarm_csv_header();
    static const std::vector<TrackedFile> files{
        {"ledger.csv", ledger.c_str()}, {"ratios.csv", ratios.c_str()},       {"telemetry.csv", telemetry.c_str()},
        {"daily.csv", daily.c_str()},   {"alarms.csv", alarms.c_str()},       {"snapshots.jsonl", nullptr},
    };
    return files;
}

void append_text(const fs::path& p, const char* header, const std::string& body)
{
    const bool fresh = !fs::exists(p) || fs::file_size(p) == 0;
    std::ofstream out(p, std::ios::binary | std::ios::app);
    if (!out) throw InputError("cannot write '" + p.string() + "'");
    if (fresh && header) out << header << '\n';
    out << body;
    if (!out) throw InputError("write failed on '" + p.string() + "'");
}

void write_state(const fs::path& dir, const std::string& hash, int days, int streak)
{
    json files = json::object();
    for (const auto& f : tracked_files()) {
        const auto p = dir / f.name;
        files[f.name] = fs::exists(p) ? fs::file_size(p) : 0;
    }
    const json state{{"config_hash", hash}, {"days_completed", days}, {"postfir_streak", streak}, {"files", files}};
    const auto tmp = dir / "state.json.tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << state.dump(2) << '\n';
        if (!out) throw InputError("cannot write checkpoint");
    }
    fs::rename(tmp, dir / "state.json");
}

}  // namespace

std::string family_name(const sp800_22::FamilyResult& f)
{
    const auto base = sp800_22::test_name(f.test);
    return f.label.empty() ? base : base + "/" + f.label;
}

std::vector<PValueRecord> ledger_records(const sp800_22::RunResult& run, const std::string& timestamp,
                                         std::int64_t run_id)
{
    std::vector<PValueRecord> out;
    for (const auto& f : run.families) {
        if (!f.uniformity) continue;
        out.push_back({timestamp, "sp800-22", run_id, family_name(f), static_cast<std::int64_t>(f.variant),
                       f.uniformity->p_value});
    }
    return out;
}

std::vector<RatioRecord> ratio_records(const sp800_22::RunResult& run, const std::string& timestamp,
                                       std::int64_t run_id)
{
    std::vector<RatioRecord> out;
    for (const auto& f : run.families) {
        if (!f.ratio) continue;
        out.push_back({timestamp, run_id, family_name(f), static_cast<std::int64_t>(f.variant), f.ratio->ratio,
                       f.ratio->threshold});
    }
    return out;
}

TrialResult run_trial(const TrialConfig& cfg, const std::string& out_dir, const TrialOptions& options)
{
    cfg.validate();
    const fs::path dir(out_dir);
    fs::create_directories(dir);

    TrialResult result;
    result.config_hash = content_hash(to_json(cfg));

    int start_day = 0;
    int streak = 0;
    const auto state_path = dir / "state.json";
    if (fs::exists(state_path)) {
        std::ifstream in(state_path);
        const json state = json::parse(in, nullptr, false);
        if (!state.is_object() || !state.contains("config_hash")) throw InputError("corrupt checkpoint state.json");
        if (state["config_hash"].get<std::string>() != result.config_hash) {
            throw ResumeMismatch("checkpoint in '" + out_dir + "' was written with config " +
                                 state["config_hash"].get<std::string>() + ", current config is " +
                                 result.config_hash);
        }
        start_day = state.value("days_completed", 0);
        streak = state.value("postfir_streak", 0);
        const auto& sizes = state["files"];
        for (const auto& f : tracked_files()) {
            const auto p = dir / f.name;
            const std::uintmax_t keep = sizes.contains(f.name) ? sizes[f.name].get<std::uintmax_t>() : 0;
            if (!fs::exists(p)) {
                if (keep != 0) throw InputError(std::string("checkpointed file missing: ") + f.name);
                continue;
            }
            // Drop anything written after the last checkpoint.
            if (fs::file_size(p) < keep) throw InputError(std::string("checkpointed file truncated: ") + f.name);
            fs::resize_file(p, keep);
        }
        result.resumed = true;
    } else {
        for (const auto& f : tracked_files()) fs::remove(dir / f.name);
        fs::remove_all(dir / "runs");
    }
    {
        std::ofstream(dir / "config.json", std::ios::trunc) << to_json(cfg).dump(2) << '\n';
    }

    const std::size_t bytes = cfg.bytes_per_run();
    const std::uint64_t per_run = cfg.samples_per_run();
    const std::uint64_t per_day = per_run * static_cast<std::uint64_t>(cfg.runs_per_day);
    const auto steps = cfg.telemetry_steps_per_day;

    TelemetryModel telemetry(cfg.source, steps, per_day);
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(start_day) * steps; ++i) telemetry.step();

    AlarmMonitor monitor(cfg.source.power_nominal_mw, cfg.source.bg_offset, cfg.thresholds);
    monitor.set_postfir_streak(streak);

    const auto model_pmf = arcsine_pmf(cfg.source);
    auto battery = cfg.battery;
    battery.workers = options.workers;
    if (options.keep_run_reports) fs::create_directories(dir / "runs");

    int day = start_day;
    for (; day < cfg.days; ++day) {
        if (options.halt_after_days && day >= *options.halt_after_days) break;
        if (options.on_day) options.on_day(day, cfg.days);

        std::vector<AlarmEvent> alarms;
        std::vector<LaserTelemetry> readings;
        for (std::uint32_t s = 0; s < steps; ++s) {
            readings.push_back(telemetry.step());
            if (auto a = monitor.observe(readings.back())) alarms.push_back(*a);
        }

        HealthSnapshot snap;
        std::string ledger_rows, ratio_rows;
        for (int k = 0; k < cfg.runs_per_day; ++k) {
            const std::int64_t run_id = static_cast<std::int64_t>(day) * cfg.runs_per_day + k;
            const std::string ts = sim_timestamp(day + (k + 0.5) / cfg.runs_per_day);
            Pipeline pipe(cfg.source, cfg.fir_order, static_cast<std::uint64_t>(run_id) * per_run, options.workers);
            auto out = pipe.pull(bytes);

            const auto check = make_health_check(ts, out.foreground, out.background, out.postfir);
            for (auto& a : monitor.observe(check)) alarms.push_back(std::move(a));
            snap.foreground.merge(out.foreground);
            snap.background.merge(out.background);
            snap.postfir.merge(out.postfir);

            const auto run = sp800_22::run_battery(BitString::from_bytes(out.bytes), battery);
            for (const auto& r : ledger_records(run, ts, run_id)) ledger_rows += ledger_csv_row(r) + '\n';
            for (const auto& r : ratio_records(run, ts, run_id)) ratio_rows += ratio_csv_row(r) + '\n';
            if (options.keep_run_reports) {
                char name[32];
                std::snprintf(name, sizeof name, "run_%06lld.json", static_cast<long long>(run_id));
                auto j = sp800_22::to_json(run);
                j["run_id"] = run_id;
                j["timestamp"] = ts;
                j["config_hash"] = result.config_hash;
                std::ofstream(dir / "runs" / name, std::ios::trunc) << j.dump() << '\n';
            }
        }

        snap.timestamp = sim_timestamp(day + 1.0);
        snap.entropy = entropy_report(snap.foreground);
        snap.postfir_p = uniform_chi_square_p(snap.postfir);
        snap.background_mean = snap.background.mean();
        try {
            snap.foreground_gof_p = foreground_gof(snap.foreground, model_pmf);
        } catch (const InsufficientSampleError&) {
        }
        snap.telemetry = aggregate(readings);
        snap.alarms = alarms;

        DailyAggregate daily{day, snap.telemetry.power_mean, snap.entropy.shannon_bits, snap.entropy.min_entropy_bits};

        std::string telemetry_rows, alarm_rows;
        for (const auto& r : readings) telemetry_rows += telemetry_csv_row(r) + '\n';
        for (const auto& a : alarms) alarm_rows += alarm_csv_row(a) + '\n';
        json snap_json = to_json(snap);
        snap_json["day"] = day;
        snap_json["config_hash"] = result.config_hash;

        append_text(dir / "ledger.csv", ledger_csv_header().c_str(), ledger_rows);
        append_text(dir / "ratios.csv", ratio_csv_header().c_str(), ratio_rows);
        append_text(dir / "telemetry.csv", telemetry_csv_header().c_str(), telemetry_rows);
        append_text(dir / "daily.csv", daily_csv_header().c_str(), daily_csv_row(daily) + '\n');
        append_text(dir / "alarms.csv", alarm_csv_header().c_str(), alarm_rows);
        append_text(dir / "snapshots.jsonl", nullptr, snap_json.dump() + '\n');
        write_state(dir, result.config_hash, day + 1, monitor.postfir_streak());
    }

    result.days_completed = day;
    if (day < cfg.days) return result;

    auto inputs = load_report_inputs(out_dir);
    inputs.config_hash = result.config_hash;
    result.alarms = inputs.alarms.size();
    result.report = write_report(out_dir, inputs);
    result.finished = true;
    return result;
}

}  // namespace qrng
