// qrng: command-line harness for the simulated generator, its health
// monitor, the SP 800-22 battery and the long-run meta-analysis.
//
// Exit codes: 0 success, 1 operational error, 2 alarm, 3 resume mismatch.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrng/bitstring.hpp"
#include "qrng/config.hpp"
#include "qrng/errors.hpp"
#include "qrng/fir.hpp"
#include "qrng/health.hpp"
#include "qrng/meta_ledger.hpp"
#include "qrng/monitor.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/report.hpp"
#include "qrng/selftest.hpp"
#include "qrng/sim_clock.hpp"
#include "qrng/sp800_22.hpp"
#include "qrng/stats.hpp"
#include "qrng/trial.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qrng;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAlarm = 2;
constexpr int kExitResume = 3;

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned workers = 1;
    bool desk_scale = false;
    bool paper_scale = false;
};

std::string default_out_dir()
{
    const char* env = std::getenv("QRNG_OUT_DIR");
    return env && *env ? env : "qrng_out";
}

struct LoadedConfig {
    TrialConfig trial;
    std::string hash;
};

LoadedConfig load_config(const Common& c)
{
    const std::string path = c.config_path.empty() ? QRNG_DEFAULT_CONFIG : c.config_path;
    LoadedConfig out{load_trial_config(path), ""};
    if (c.seed) out.trial.source.seed = *c.seed;
    if (c.desk_scale) out.trial.battery = sp800_22::BatteryParams::desk_scale();
    if (c.paper_scale) out.trial.battery = sp800_22::BatteryParams::paper_scale();
    out.trial.validate();
    out.hash = content_hash(to_json(out.trial));
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InputError("write failed on '" + path.string() + "'");
}

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void add_common(CLI::App* cmd, Common& c, bool with_scale = false)
{
    cmd->add_option("--config", c.config_path, "JSON config (default: pinned calibrated config)");
    cmd->add_option("--seed", c.seed, "Override the source seed");
    cmd->add_option("--out-dir", c.out_dir, "Output directory (default: $QRNG_OUT_DIR or ./qrng_out)");
    cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
    if (with_scale) {
        auto* desk = cmd->add_flag("--desk-scale", c.desk_scale, "L=100 substrings of 1e5 bits");
        cmd->add_flag("--paper-scale", c.paper_scale, "L=1000 substrings of 1e6 bits")->excludes(desk);
    }
}

// ---- generate ----

struct GenerateArgs {
    std::size_t bytes = 1 << 20;
    std::size_t snapshot_bytes = 1 << 20;
    std::string output;
    std::string raw_output;
    bool continue_on_alarm = false;
};

int cmd_generate(const Common& common, const GenerateArgs& args)
{
    const auto cfg = load_config(common);
    const fs::path dir(common.out_dir);
    fs::create_directories(dir);
    const fs::path out_path = args.output.empty() ? dir / "qrng.bin" : fs::path(args.output);
    const bool to_stdout = args.output == "-";

    std::ofstream out;
    if (!to_stdout) {
        out.open(out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + out_path.string() + "'");
    }
    std::ofstream snaps(dir / "snapshots.jsonl", std::ios::trunc);

    const auto& src = cfg.trial.source;
    const double samples_per_day = src.pulse_rate_hz * 86400.0;
    const std::uint32_t steps = cfg.trial.telemetry_steps_per_day;
    TelemetryModel telemetry(src, steps, static_cast<std::uint64_t>(samples_per_day));
    AlarmMonitor monitor(src.power_nominal_mw, src.bg_offset, cfg.trial.thresholds);
    const auto pmf = arcsine_pmf(src);
    Pipeline pipe(src, cfg.trial.fir_order, 0, common.workers);

    std::size_t written = 0;
    std::size_t total_alarms = 0;
    bool halted = false;
    std::uint64_t digest = 0xcbf29ce484222325ULL;
    while (written < args.bytes && !halted) {
        const std::size_t n = std::min(args.snapshot_bytes, args.bytes - written);
        auto seg = pipe.pull(n);
        if (to_stdout) {
            std::cout.write(reinterpret_cast<const char*>(seg.bytes.data()), static_cast<std::streamsize>(n));
        } else {
            out.write(reinterpret_cast<const char*>(seg.bytes.data()), static_cast<std::streamsize>(n));
        }
        digest = fnv1a(seg.bytes, digest);
        written += n;

        HealthSnapshot snap;
        snap.timestamp = sim_timestamp(static_cast<double>(pipe.next_sample()) / samples_per_day);
        std::vector<LaserTelemetry> readings;
        // Telemetry readings due before the current sample position.
        while ((telemetry.steps_taken() + 1) * static_cast<std::uint64_t>(samples_per_day) / steps <=
               pipe.next_sample()) {
            readings.push_back(telemetry.step());
            if (auto a = monitor.observe(readings.back())) snap.alarms.push_back(*a);
        }
        const auto check = make_health_check(snap.timestamp, seg.foreground, seg.background, seg.postfir);
        for (auto& a : monitor.observe(check)) snap.alarms.push_back(std::move(a));
        snap.foreground = seg.foreground;
        snap.background = seg.background;
        snap.postfir = seg.postfir;
        snap.entropy = check.entropy;
        snap.postfir_p = check.postfir_p;
        snap.background_mean = check.background_mean;
        try {
            snap.foreground_gof_p = foreground_gof(seg.foreground, pmf);
        } catch (const InsufficientSampleError&) {
        }
        snap.telemetry = aggregate(readings);
        auto j = to_json(snap);
        j["config_hash"] = cfg.hash;
        j["bytes_written"] = written;
        snaps << j.dump() << '\n';

        for (const auto& a : snap.alarms) {
            std::cerr << "ALARM " << to_string(a.kind) << " at " << a.timestamp << ": observed " << a.observed
                      << ", threshold " << a.threshold << '\n';
        }
        total_alarms += snap.alarms.size();
        if (!snap.alarms.empty() && !args.continue_on_alarm) halted = true;
    }
    if (!to_stdout && !out) throw InputError("write failed on '" + out_path.string() + "'");

    if (!args.raw_output.empty()) {
        const auto frame = generate_range(src, 0, pipe.next_sample(), common.workers);
        const auto raw = encode_frame(frame);
        write_file(args.raw_output, std::string(raw.begin(), raw.end()));
    }

    const json summary{{"config_hash", cfg.hash},  {"bytes", written},       {"requested", args.bytes},
                       {"digest", hex64(digest)},  {"alarms", total_alarms}, {"halted", halted},
                       {"output", to_stdout ? "-" : out_path.string()}};
    (to_stdout ? std::cerr : std::cout) << summary.dump(2) << '\n';
    return total_alarms > 0 ? kExitAlarm : kExitOk;
}

// ---- trial ----

struct TrialArgs {
    std::optional<int> days;
    std::optional<int> runs_per_day;
    std::optional<int> halt_after_days;
    bool keep_run_reports = false;
    bool quiet = false;
};

int cmd_trial(const Common& common, const TrialArgs& args)
{
    auto cfg = load_config(common).trial;
    if (args.days) cfg.days = *args.days;
    if (args.runs_per_day) cfg.runs_per_day = *args.runs_per_day;

    TrialOptions opt;
    opt.workers = common.workers;
    opt.halt_after_days = args.halt_after_days;
    opt.keep_run_reports = args.keep_run_reports;
    if (!args.quiet) {
        opt.on_day = [](int day, int days) { std::cerr << "day " << day + 1 << "/" << days << '\n'; };
    }
    const auto result = run_trial(cfg, common.out_dir, opt);
    json summary{{"config_hash", result.config_hash},
                 {"days_completed", result.days_completed},
                 {"resumed", result.resumed},
                 {"finished", result.finished},
                 {"alarms", result.alarms}};
    if (result.finished) summary["verdict"] = result.report["verdict"];
    std::cout << summary.dump(2) << '\n';
    return result.alarms > 0 ? kExitAlarm : kExitOk;
}

// ---- battery ----

struct BatteryArgs {
    std::string input;
    bool ascii = false;
    std::optional<std::size_t> length;
    std::optional<std::size_t> substrings;
    std::string output;
    std::string ledger;
    std::optional<std::int64_t> run_id;
    std::string timestamp;
    bool no_ledger = false;
};

int cmd_battery(const Common& common, const BatteryArgs& args)
{
    const auto cfg = load_config(common);
    auto params = cfg.trial.battery;
    if (args.length) params.substring_len = *args.length;
    if (args.substrings) params.num_substrings = *args.substrings;
    params.workers = common.workers;
    params.validate();

    const fs::path dir(common.out_dir);
    fs::create_directories(dir);

    BitString bits(1);
    std::string source;
    if (!args.input.empty()) {
        const auto text = read_file(args.input);
        if (args.ascii) {
            std::string digits;
            for (char ch : text) {
                if (ch == '0' || ch == '1') {
                    digits.push_back(ch);
                } else if (!std::isspace(static_cast<unsigned char>(ch))) {
                    throw InputError("ascii input may only contain 0, 1 and whitespace");
                }
            }
            bits = BitString::from_text(digits);
        } else {
            bits = BitString::from_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
        }
        source = args.input;
    } else {
        Pipeline pipe(cfg.trial.source, cfg.trial.fir_order, 0, common.workers);
        const auto out = pipe.pull((params.substring_len * params.num_substrings + 7) / 8);
        bits = BitString::from_bytes(out.bytes);
        source = "simulator";
    }

    const auto run = sp800_22::run_battery(bits, params);
    const std::string ledger_path = args.ledger.empty() ? (dir / "ledger.csv").string() : args.ledger;
    std::int64_t run_id = 0;
    if (args.run_id) {
        run_id = *args.run_id;
    } else if (fs::exists(ledger_path)) {
        for (const auto& r : read_ledger(ledger_path)) {
            if (r.battery == "sp800-22") run_id = std::max(run_id, r.run_id + 1);
        }
    }
    const std::string ts = args.timestamp.empty() ? sim_timestamp(0.0) : args.timestamp;
    parse_iso8601_utc(ts);

    auto j = sp800_22::to_json(run);
    j["run_id"] = run_id;
    j["timestamp"] = ts;
    j["input"] = source;
    j["config_hash"] = cfg.hash;
    const fs::path report_path = args.output.empty() ? dir / "battery_report.json" : fs::path(args.output);
    write_file(report_path, j.dump(2) + "\n");

    if (!args.no_ledger) {
        const auto records = ledger_records(run, ts, run_id);
        append_ledger(ledger_path, records);
    }

    std::size_t ratio_fail = 0, unif_fail = 0, with_ratio = 0;
    std::printf("%-40s %9s %9s %9s %12s\n", "family", "applic.", "ratio", "thresh", "uniformity");
    for (const auto& f : run.families) {
        if (f.ratio) {
            ++with_ratio;
            ratio_fail += f.ratio->passed ? 0 : 1;
            unif_fail += f.uniformity->passed ? 0 : 1;
            std::printf("%-40s %9zu %9.4f %9.4f %12.4g%s\n", family_name(f).c_str(), f.p_values.size(),
                        f.ratio->ratio, f.ratio->threshold, f.uniformity->p_value,
                        (f.ratio->passed && f.uniformity->passed) ? "" : "  FAIL");
        } else {
            std::printf("%-40s %9zu %9s %9s %12s\n", family_name(f).c_str(), f.p_values.size(), "-", "-", "-");
        }
    }
    std::printf("families %zu (with second-order checks: %zu), ratio failures %zu, uniformity failures %zu\n",
                run.families.size(), with_ratio, ratio_fail, unif_fail);
    std::printf("report: %s\n", report_path.string().c_str());
    return kExitOk;
}

// ---- meta ----

struct MetaArgs {
    std::string ledger;
    std::string battery;
    std::optional<std::size_t> window;
    std::vector<double> epsilons;
};

int cmd_meta(const Common& common, const MetaArgs& args)
{
    const std::string path = args.ledger.empty() ? (fs::path(common.out_dir) / "ledger.csv").string() : args.ledger;
    const auto records = read_ledger(path);
    std::map<std::string, std::vector<PValueRecord>> by_battery;
    for (const auto& r : records) by_battery[r.battery].push_back(r);

    const std::vector<double> eps =
        args.epsilons.empty() ? std::vector<double>(std::begin(kDefaultCatastrophicEpsilons),
                                                    std::end(kDefaultCatastrophicEpsilons))
                              : args.epsilons;
    json out = json::object();
    for (const auto& [name, recs] : by_battery) {
        if (!args.battery.empty() && name != args.battery) continue;
        BatteryProfile profile;
        try {
            profile = profile_by_name(name);
        } catch (const ConfigError&) {
            std::cerr << "skipping battery '" << name << "': no profile\n";
            continue;
        }
        if (args.window) profile.window = *args.window;
        const auto n_out = count_outside(recs, profile.interval);
        const auto iv = acceptance_interval(recs.size(), profile.alpha);
        const auto windows = windowed_nout(recs, profile.window, profile.interval);
        json scan = json::array();
        for (const auto& level : catastrophic_scan(recs, eps)) scan.push_back(to_json(level));
        auto w = to_json(windows);
        w["hi"] = acceptance_interval(profile.window, profile.alpha).hi;
        out[name] = {{"records", recs.size()}, {"interval", {profile.interval.lo, profile.interval.hi}},
                     {"n_out", n_out},         {"acceptance", to_json(iv)},
                     {"inside", iv.contains(n_out)}, {"windows", w},
                     {"catastrophic_scan", scan}};
    }
    std::cout << out.dump(2) << '\n';
    return kExitOk;
}

// ---- ingest ----

struct IngestArgs {
    std::string input;
    std::string profile = "bigcrush";
    std::string ledger;
};

int cmd_ingest(const Common& common, const IngestArgs& args)
{
    const auto profile = profile_by_name(args.profile);
    const auto incoming = parse_ledger_csv(read_file(args.input));
    const auto rep = validate_ingest(incoming, profile);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';

    fs::create_directories(common.out_dir);
    const std::string path = args.ledger.empty() ? (fs::path(common.out_dir) / "ledger.csv").string() : args.ledger;
    if (fs::exists(path) && fs::file_size(path) > 0) {
        std::set<std::tuple<std::string, std::int64_t, std::string, std::int64_t>> keys;
        for (const auto& r : read_ledger(path)) keys.emplace(r.battery, r.run_id, r.test_name, r.statistic_index);
        for (std::size_t i = 0; i < incoming.size(); ++i) {
            const auto& r = incoming[i];
            if (keys.contains({r.battery, r.run_id, r.test_name, r.statistic_index})) {
                throw InputError("record " + std::to_string(i + 1) + " (run " + std::to_string(r.run_id) + ", " +
                                 r.test_name + ") already present in " + path);
            }
        }
    }
    append_ledger(path, incoming);

    const auto n_out = count_outside(incoming, profile.interval);
    const auto iv = acceptance_interval(std::max<std::size_t>(incoming.size(), 1), profile.alpha);
    const json summary{{"ingested", rep.records}, {"runs", rep.runs},
                       {"expected_per_run", profile.per_run}, {"warnings", rep.warnings},
                       {"n_out", n_out}, {"acceptance", to_json(iv)},
                       {"ledger", path}};
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
}

// ---- bench ----

struct BenchArgs {
    double seconds = 2.0;
    std::size_t chunk_bytes = 8 << 20;
};

int cmd_bench(const Common& common, const BenchArgs& args)
{
    const auto cfg = load_config(common);
    const unsigned multi = common.workers > 1 ? common.workers : std::max(2u, std::thread::hardware_concurrency());

    auto measure = [&](unsigned workers) {
        Pipeline pipe(cfg.trial.source, cfg.trial.fir_order, 0, workers);
        std::size_t bytes = 0;
        const auto t0 = std::chrono::steady_clock::now();
        double elapsed = 0.0;
        do {
            bytes += pipe.pull(args.chunk_bytes).bytes.size();
            elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } while (elapsed < args.seconds);
        return json{{"workers", workers}, {"bytes", bytes}, {"seconds", elapsed},
                    {"bytes_per_second", static_cast<double>(bytes) / elapsed}};
    };
    auto digest = [&](unsigned workers) {
        Pipeline pipe(cfg.trial.source, cfg.trial.fir_order, 0, workers);
        return hex64(fnv1a(pipe.pull(args.chunk_bytes).bytes));
    };

    const auto d1 = digest(1);
    const auto dn = digest(multi);
    const json report{{"config_hash", cfg.hash},
                      {"hardware_threads", std::thread::hardware_concurrency()},
                      {"single", measure(1)},
                      {"multi", measure(multi)},
                      {"digest_single", d1},
                      {"digest_multi", dn},
                      {"deterministic", d1 == dn}};
    fs::create_directories(common.out_dir);
    write_file(fs::path(common.out_dir) / "bench.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << '\n';
    return d1 == dn ? kExitOk : kExitError;
}

// ---- selftest ----

int cmd_selftest()
{
    const auto cases = run_selftest();
    std::size_t failed = 0;
    for (const auto& c : cases) {
        if (c.passed) continue;
        ++failed;
        std::cout << "FAIL " << c.name << ": " << c.detail << '\n';
    }
    std::cout << (cases.size() - failed) << "/" << cases.size() << " known-answer checks passed\n";
    return failed == 0 ? kExitOk : kExitError;
}

// ---- report ----

int cmd_report(const Common& common)
{
    const auto inputs = load_report_inputs(common.out_dir);
    const auto report = write_report(common.out_dir, inputs);
    std::cout << report["verdict"].dump(2) << '\n';
    return kExitOk;
}

// ---- calibrate ----

struct CalibrateArgs {
    std::string output;
    std::size_t fir_samples = 10'000'000;
};

int cmd_calibrate(const Common& common, const CalibrateArgs& args)
{
    const CalibrationTarget target;
    const auto cal = calibrate_source(target);
    std::cerr << "source: gain " << cal.gain << ", offset " << cal.offset << ", noise_sigma " << cal.noise_sigma
              << " -> " << cal.shannon_bits << " / " << cal.min_entropy_bits << " bits\n";

    // The filter order is chosen on the ideal arcsine source.
    const auto ideal = ideal_arcsine_config(common.seed.value_or(1));
    const auto raw = generate_range(ideal, 0, args.fir_samples, common.workers);
    const auto fir = calibrate_fir_order(raw.foreground, kDefaultFirCandidates, args.fir_samples);
    std::cerr << "fir order: " << fir.chosen_order << '\n';

    TrialConfig cfg;
    cfg.source.seed = common.seed.value_or(1);
    cfg.source.gain = cal.gain;
    cfg.source.offset = cal.offset;
    cfg.source.noise_sigma = cal.noise_sigma;
    cfg.fir_order = fir.chosen_order;
    cfg.days = 7;
    cfg.runs_per_day = 10;
    auto j = to_json(cfg);

    json candidates = json::array();
    for (const auto& c : fir.candidates) {
        candidates.push_back({{"order", c.order}, {"uniformity_p", c.uniformity_p}, {"serial_r", c.serial_r},
                              {"serial_bound", c.serial_bound}, {"passed", c.passed}});
    }
    j["calibration"] = {{"target", {{"shannon_bits", target.shannon_bits},
                                    {"min_entropy_bits", target.min_entropy_bits},
                                    {"shannon_tol", target.shannon_tol},
                                    {"min_entropy_tol", target.min_entropy_tol}}},
                        {"model_shannon_bits", cal.shannon_bits},
                        {"model_min_entropy_bits", cal.min_entropy_bits},
                        {"evaluations", cal.evaluations},
                        {"fir_samples", args.fir_samples},
                        {"fir_candidates", candidates}};
    const fs::path out = args.output.empty() ? fs::path(common.out_dir) / "calibrated_source.json" : fs::path(args.output);
    write_file(out, j.dump(2) + "\n");
    std::cout << out.string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulated quantum RNG: generation, health monitoring, statistical batteries and long-run analysis"};
    app.require_subcommand(1);

    Common common;
    common.out_dir = default_out_dir();

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write post-filter bytes and periodic health snapshots");
    add_common(generate, common);
    generate->add_option("--bytes", gen.bytes, "Number of output bytes");
    generate->add_option("--snapshot-bytes", gen.snapshot_bytes, "Bytes between health snapshots")
        ->check(CLI::PositiveNumber);
    generate->add_option("-o,--output", gen.output, "Output file, '-' for stdout (default: <out-dir>/qrng.bin)");
    generate->add_option("--raw-output", gen.raw_output, "Also dump the raw frames (LE16, F,B interleaved)");
    generate->add_flag("--continue-on-alarm", gen.continue_on_alarm, "Keep generating after an alarm");

    TrialArgs trial_args;
    auto* trial = app.add_subcommand("trial", "Run (or resume) a long-run trial");
    add_common(trial, common, true);
    trial->add_option("--days", trial_args.days, "Trial length in simulated days")->check(CLI::PositiveNumber);
    trial->add_option("--runs-per-day", trial_args.runs_per_day, "Battery runs per simulated day")
        ->check(CLI::PositiveNumber);
    trial->add_option("--halt-after-days", trial_args.halt_after_days, "Stop after this many completed days");
    trial->add_flag("--keep-run-reports", trial_args.keep_run_reports, "Write per-run battery JSON");
    trial->add_flag("-q,--quiet", trial_args.quiet, "No progress output");

    BatteryArgs bat;
    auto* battery = app.add_subcommand("battery", "Run the SP 800-22 battery once");
    add_common(battery, common, true);
    battery->add_option("-i,--input", bat.input, "Input file (default: generate from the config)");
    battery->add_flag("--ascii", bat.ascii, "Input is text of 0/1 characters");
    battery->add_option("--length", bat.length, "Substring length in bits");
    battery->add_option("--substrings", bat.substrings, "Number of substrings L");
    battery->add_option("-o,--output", bat.output, "Report JSON (default: <out-dir>/battery_report.json)");
    battery->add_option("--ledger", bat.ledger, "Ledger to append to (default: <out-dir>/ledger.csv)");
    battery->add_option("--run-id", bat.run_id, "Run id for ledger rows (default: next free)");
    battery->add_option("--timestamp", bat.timestamp, "ISO-8601 timestamp for ledger rows");
    battery->add_flag("--no-ledger", bat.no_ledger, "Do not append to the ledger");

    MetaArgs meta_args;
    auto* meta = app.add_subcommand("meta", "Meta-analysis of a p-value ledger");
    add_common(meta, common);
    meta->add_option("--ledger", meta_args.ledger, "Ledger CSV (default: <out-dir>/ledger.csv)");
    meta->add_option("--battery", meta_args.battery, "Only this battery");
    meta->add_option("--window", meta_args.window, "Window size override")->check(CLI::PositiveNumber);
    meta->add_option("--epsilon", meta_args.epsilons, "Catastrophic-scan bounds");

    IngestArgs ing;
    auto* ingest = app.add_subcommand("ingest", "Append external p-values (e.g. Big Crush logs) to the ledger");
    add_common(ingest, common);
    ingest->add_option("-i,--input", ing.input, "CSV in ledger format")->required();
    ingest->add_option("--profile", ing.profile, "Battery profile: bigcrush or sp800-22");
    ingest->add_option("--ledger", ing.ledger, "Target ledger (default: <out-dir>/ledger.csv)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Measure source+filter throughput");
    add_common(bench, common);
    bench->add_option("--seconds", bench_args.seconds, "Duration per mode")->check(CLI::PositiveNumber);
    bench->add_option("--chunk-bytes", bench_args.chunk_bytes, "Bytes per pull")->check(CLI::PositiveNumber);

    auto* selftest = app.add_subcommand("selftest", "Run the built-in known-answer checks");

    auto* report = app.add_subcommand("report", "Rebuild the report from a trial directory");
    add_common(report, common);

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Fit the source model to the entropy targets and pick M");
    add_common(calibrate, common);
    calibrate->add_option("-o,--output", cal.output, "Config file to write");
    calibrate->add_option("--fir-samples", cal.fir_samples, "Ideal-source samples for the filter calibration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (*generate) return cmd_generate(common, gen);
        if (*trial) return cmd_trial(common, trial_args);
        if (*battery) return cmd_battery(common, bat);
        if (*meta) return cmd_meta(common, meta_args);
        if (*ingest) return cmd_ingest(common, ing);
        if (*bench) return cmd_bench(common, bench_args);
        if (*selftest) return cmd_selftest();
        if (*report) return cmd_report(common);
        if (*calibrate) return cmd_calibrate(common, cal);
    } catch (const ResumeMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitResume;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
