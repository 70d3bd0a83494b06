// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "qrng/bitstring.hpp"
#include "qrng/config.hpp"
#include "qrng/health.hpp"
#include "qrng/histogram.hpp"
#include "qrng/meta_ledger.hpp"
#include "qrng/monitor.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/rng.hpp"
#include "qrng/sp800_22.hpp"
#include "qrng/stats.hpp"
#include "qrng/trial.hpp"

namespace {
#include "reference_values.inc"
}

using namespace qrng;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

TrialConfig pinned() { return load_trial_config(QRNG_DEFAULT_CONFIG); }

Outcome acceptance_intervals()
{
    const auto a = acceptance_interval(72390, 0.002);
    const auto b = acceptance_interval(535612, 1e-4);
    const auto c = acceptance_interval(1016, 0.002);
    const auto d = acceptance_interval(72390, 2e-5);
    const bool ok = a == CountInterval{109, 181} && b == CountInterval{32, 76} && c.hi == 6 &&
                    d == CountInterval{0, 5};
    return {ok, fmt("[%llu,%llu] [%llu,%llu] hi=%llu [%llu,%llu]", (unsigned long long)a.lo,
                    (unsigned long long)a.hi, (unsigned long long)b.lo, (unsigned long long)b.hi,
                    (unsigned long long)c.hi, (unsigned long long)d.lo, (unsigned long long)d.hi)};
}

Outcome ratio_thresholds()
{
    const double t1000 = sp800_22::ratio_threshold(1000, 0.01);
    const double t600 = sp800_22::ratio_threshold(600, 0.01);
    const bool ok = std::round(t1000 * 1000) == 981 && std::round(t600 * 1000) == 978;
    return {ok, fmt("L=1000 -> %.5f, L=600 -> %.5f", t1000, t600)};
}

Outcome entropy_oracle()
{
    const auto pmf = ideal_arcsine_pmf();
    const double hs = shannon_entropy(pmf);
    const double hm = min_entropy(pmf);
    const double edge = -std::log2(2.0 / std::numbers::pi * std::asin(1.0 / 32.0));
    const double e1 = std::abs(hs - kArcsineShannonBits);
    const double e2 = std::abs(hm - kArcsineMinEntropyBits);
    const double e3 = std::abs(hm - edge);
    const bool ok = e1 <= 1e-9 && e2 <= 1e-9 && e3 <= 1e-9;
    return {ok, fmt("H=%.12f (err %.1e), Hmin=%.12f (err %.1e, edge err %.1e)", hs, e1, hm, e2, e3)};
}

Outcome calibration_reproduction()
{
    const auto cfg = pinned().source;
    Histogram h;
    const std::uint64_t total = 100'000'000;
    const std::size_t step = 16 * kChunkSamples;
    for (std::uint64_t first = 0; first < total; first += step) {
        const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(step, total - first));
        h.update(generate_range(cfg, first, n, workers()).foreground);
    }
    const double hs = shannon_entropy(h);
    const double hm = min_entropy(h);
    const bool ok = std::abs(hs - 9.27) <= 0.05 && std::abs(hm - 8.56) <= 0.08;
    return {ok, fmt("10^8 samples: Shannon %.4f (9.27 +/- 0.05), min-entropy %.4f (8.56 +/- 0.08)", hs, hm)};
}

Outcome null_trial()
{
    auto cfg = pinned();
    cfg.days = 7;
    cfg.runs_per_day = 10;
    const auto dir = fs::temp_directory_path() / "qrng_acceptance_trial";
    fs::remove_all(dir);
    TrialOptions opt;
    opt.workers = workers();
    const auto res = run_trial(cfg, dir.string(), opt);
    const auto& v = res.report["verdict"];
    const auto& sec = res.report["batteries"]["sp800-22"];
    std::size_t weekly_fail = 0;
    for (const auto& w : res.report["weekly_ratios"]) weekly_fail += !w["passed"].get<bool>();
    const bool ok = res.finished && res.alarms == 0 && v["totals_inside"].get<bool>() &&
                    v["ratios_pass"].get<bool>() && v["catastrophic_accepted"].get<bool>() && v["pass"].get<bool>();
    auto detail = fmt("alarms=%zu, uniformity n_out=%llu in [%llu,%llu] over %zu p-values, weekly ratio failures=%zu",
                      res.alarms, (unsigned long long)sec["n_out"].get<std::uint64_t>(),
                      (unsigned long long)sec["acceptance"][0].get<std::uint64_t>(),
                      (unsigned long long)sec["acceptance"][1].get<std::uint64_t>(),
                      sec["records"].get<std::size_t>(), weekly_fail);
    fs::remove_all(dir);
    return {ok, detail};
}

Outcome known_answers()
{
    using namespace sp800_22;
    const double pf = frequency(BitString::from_text("1011010101")).p_values.at(0);
    const double pr = runs(BitString::from_text("1001101011")).p_values.at(0);
    double worst = 0.0;
    std::size_t points = 0;
    for (const auto& r : kErfcRefs) {
        worst = std::max(worst, std::abs(qrng::erfc(r.x) - r.value));
        ++points;
    }
    for (const auto& r : kIgamcRefs) {
        worst = std::max(worst, std::abs(igamc(r.a, r.x) - r.value));
        ++points;
    }
    const bool ok = std::abs(pf - 0.5271) <= 1e-4 && std::abs(pr - 0.1472) <= 1e-4 && worst <= 1e-10 && points >= 20;
    return {ok, fmt("Frequency %.6f, Runs %.6f, max special-function error %.1e over %zu points", pf, pr, worst,
                    points)};
}

Outcome negative_controls()
{
    const auto params = [] {
        auto p = sp800_22::BatteryParams::desk_scale();
        p.workers = workers();
        return p;
    }();
    const std::size_t n = params.num_substrings * params.substring_len;

    BitString alternating(n);
    for (std::size_t i = 1; i < n; i += 2) alternating.set(i, true);
    const BitString zeros(n);
    std::vector<std::uint8_t> counter(n / 8);
    for (std::size_t i = 0; i < counter.size(); ++i) counter[i] = static_cast<std::uint8_t>((i / 4) >> (8 * (3 - i % 4)));

    const std::pair<const char*, BitString> inputs[] = {
        {"alternating", alternating}, {"all-zeros", zeros}, {"counter", BitString::from_bytes(counter)}};
    const double eps[] = {1e-6};
    bool ok = true;
    std::string detail;
    for (const auto& [name, bits] : inputs) {
        const auto run = sp800_22::run_battery(bits, params);
        std::vector<PValueRecord> recs;
        for (const auto& f : run.families) {
            for (std::size_t i = 0; i < f.p_values.size(); ++i) {
                recs.push_back({"2020-01-01T00:00:00Z", "sp800-22", 0, family_name(f), static_cast<std::int64_t>(i),
                                f.p_values[i]});
            }
        }
        double min_p = 1.0;
        for (const auto& r : recs) min_p = std::min(min_p, r.p);
        const auto scan = catastrophic_scan(recs, eps);
        const bool flagged = scan[0].count > 0 && !scan[0].accepted;
        ok = ok && min_p < 1e-6 && flagged;
        detail += fmt("%s: min p %.2e, %llu below 1e-6%s; ", name, min_p, (unsigned long long)scan[0].count,
                      flagged ? " (flagged)" : "");
    }
    return {ok, detail};
}

Outcome fault_detection()
{
    // Power drift: +5%/day starting at day 1, telemetry every hour.
    auto cfg = pinned().source;
    const std::uint64_t per_day = 24'000'000;
    const std::uint32_t steps = 24;
    cfg.faults = {{FaultKind::power_drift, 5.0, 0, per_day, 2 * per_day}};
    TelemetryModel model(cfg, steps, per_day);
    AlarmMonitor monitor(cfg.power_nominal_mw, cfg.bg_offset);
    long cross = -1, alarm = -1;
    for (int i = 0; i < 3 * static_cast<int>(steps); ++i) {
        const auto t = model.step();
        if (cross < 0 && t.power_mw > cfg.power_nominal_mw * 1.025) cross = i;
        if (alarm < 0 && monitor.observe(t)) alarm = i;
    }
    const bool power_ok = cross >= 0 && alarm >= 0 && alarm - cross <= 1;

    // Saturation from the start of the third monitoring interval.
    auto sat = pinned().source;
    const std::size_t interval = 1'000'000;
    sat.faults = {{FaultKind::saturation, 1.5, 0, 2 * interval, ~0ULL - 2 * interval}};
    AlarmMonitor check_monitor(sat.power_nominal_mw, sat.bg_offset);
    Pipeline pipe(sat, pinned().fir_order, 0, workers());
    long sat_alarm = -1;
    double hmin_at_alarm = 0.0;
    for (int k = 0; k < 4 && sat_alarm < 0; ++k) {
        const auto out = pipe.pull(interval);
        for (const auto& e : check_monitor.observe(make_health_check("", out.foreground, out.background, out.postfir))) {
            if (e.kind == AlarmKind::min_entropy && sat_alarm < 0) {
                sat_alarm = k;
                hmin_at_alarm = e.observed;
            }
        }
    }
    // Interval 2 is the first one that contains saturated samples beyond the warm-up.
    const bool sat_ok = sat_alarm == 2;
    return {power_ok && sat_ok,
            fmt("power: crossing at step %ld, alarm at step %ld; saturation: alarm in interval %ld (fault starts in "
                "interval 2), min-entropy %.3f",
                cross, alarm, sat_alarm, hmin_at_alarm)};
}

Outcome determinism()
{
    const auto cfg = pinned();
    Pipeline p1(cfg.source, cfg.fir_order, 0, 1);
    Pipeline p8(cfg.source, cfg.fir_order, 0, 8);
    const auto a = p1.pull(cfg.bytes_per_run());
    const auto b = p8.pull(cfg.bytes_per_run());
    const bool gen_ok = a.bytes == b.bytes && a.foreground == b.foreground && a.postfir == b.postfir;

    auto params = cfg.battery;
    params.workers = 1;
    const auto bits = BitString::from_bytes(a.bytes);
    const auto r1 = sp800_22::to_json(sp800_22::run_battery(bits, params)).dump();
    params.workers = 8;
    const auto r8 = sp800_22::to_json(sp800_22::run_battery(bits, params)).dump();
    const bool bat_ok = r1 == r8;
    return {gen_ok && bat_ok, fmt("%zu generated bytes %s, battery report (%zu bytes JSON) %s", a.bytes.size(),
                                  gen_ok ? "identical" : "DIFFER", r1.size(), bat_ok ? "identical" : "DIFFER")};
}

Outcome statistical_consistency()
{
    CounterRng rng(1, Stream::test_data, 72390);
    std::vector<PValueRecord> recs(72390);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i] = {"2020-01-01T00:00:00Z", "bigcrush", static_cast<std::int64_t>(i / 254), "t",
                   static_cast<std::int64_t>(i % 254), rng.uniform()};
    }
    const Interval bc{0.001, 0.999};
    const auto n_out = count_outside(recs, bc);
    const auto w = windowed_nout(recs, 1016, bc);
    const bool ok = acceptance_interval(72390, 0.002).contains(n_out) && w.mean >= 1.0 && w.mean <= 3.1;
    return {ok, fmt("n_out=%llu in [109,181], %zu complete windows of 1016, mean %.3f in [1.0,3.1]",
                    (unsigned long long)n_out, w.counts.size() - (w.last_partial ? 1 : 0), w.mean)};
}

}  // namespace

int main(int argc, char** argv)
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double max_seconds;  // 0: no runtime bound
    };
    const std::vector<Criterion> criteria{
        {"acceptance intervals", acceptance_intervals, 1.0},
        {"passing-ratio thresholds", ratio_thresholds, 1.0},
        {"entropy oracle", entropy_oracle, 1.0},
        {"calibrated entropies", calibration_reproduction, 0.0},
        {"null 7-day trial", null_trial, 0.0},
        {"known answers", known_answers, 1.0},
        {"negative controls", negative_controls, 0.0},
        {"fault detection", fault_detection, 0.0},
        {"determinism under parallelism", determinism, 0.0},
        {"statistical consistency", statistical_consistency, 0.0},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], criteria.size());
            return 2;
        }
        selected.push_back(n);
    }
    int failed = 0;
    int ran = 0;
    int id = 0;
    for (const auto& [name, fn, max_seconds] : criteria) {
        ++id;
        if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (max_seconds > 0.0 && secs >= max_seconds) {
            o.passed = false;
            o.detail += fmt(" (runtime limit %.0fs exceeded)", max_seconds);
        }
        std::printf("%s  %2d  %-30s %7.2fs  %s\n", o.passed ? "PASS" : "FAIL", id, name, secs, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.passed;
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
