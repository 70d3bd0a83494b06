#include "qrng/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "qrng/errors.hpp"
#include "qrng/sim_clock.hpp"

namespace qrng {

namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename T>
T number(std::string_view s, std::size_t lineno, const char* what)
{
    T v{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc{} || ptr != end) {
        throw InputError(std::string(what) + " line " + std::to_string(lineno) + ": bad number '" +
                         std::string(s) + "'");
    }
    return v;
}

// Calls row(fields, lineno) for every data line after the expected header.
template <typename F>
void for_each_row(const std::string& text, const std::string& header, std::size_t fields, const char* what, F row)
{
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != header) throw InputError(std::string(what) + " line " + std::to_string(lineno) + ": bad header");
            header_seen = true;
            continue;
        }
        const auto f = split(line);
        if (f.size() != fields) {
            throw InputError(std::string(what) + " line " + std::to_string(lineno) + ": expected " +
                             std::to_string(fields) + " fields");
        }
        row(f, lineno);
    }
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string family_base(const std::string& name) { return name.substr(0, name.find('/')); }

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Telemetry readings sorted by time, with parsed timestamps.
class TelemetryIndex {
public:
    explicit TelemetryIndex(std::span<const LaserTelemetry> readings) : readings_(readings.begin(), readings.end())
    {
        std::stable_sort(readings_.begin(), readings_.end(), [](const auto& a, const auto& b) {
            return parse_iso8601_utc(a.timestamp) < parse_iso8601_utc(b.timestamp);
        });
        for (const auto& r : readings_) times_.push_back(parse_iso8601_utc(r.timestamp));
    }

    bool empty() const { return readings_.empty(); }

    // Readings inside [t0, t1]; when there are none, the last reading at or
    // before t1 (or the first reading overall).
    TelemetryAggregate between(std::int64_t t0, std::int64_t t1) const
    {
        if (readings_.empty()) return {};
        const auto lo = std::lower_bound(times_.begin(), times_.end(), t0) - times_.begin();
        const auto hi = std::upper_bound(times_.begin(), times_.end(), t1) - times_.begin();
        if (hi > lo) return aggregate(std::span(readings_).subspan(lo, hi - lo));
        const auto at = hi > 0 ? hi - 1 : 0;
        return aggregate(std::span(readings_).subspan(at, 1));
    }

private:
    std::vector<LaserTelemetry> readings_;
    std::vector<std::int64_t> times_;
};

json battery_section(const std::vector<PValueRecord>& records, const BatteryProfile& profile,
                     const TelemetryIndex& telemetry)
{
    json s;
    s["profile"] = {{"interval", {profile.interval.lo, profile.interval.hi}},
                    {"alpha", profile.alpha},
                    {"expected_per_run", profile.per_run},
                    {"window", profile.window}};
    const auto n_out = count_outside(records, profile.interval);
    const auto total_iv = acceptance_interval(records.size(), profile.alpha);
    s["records"] = records.size();
    s["n_out"] = n_out;
    s["acceptance"] = to_json(total_iv);
    s["inside"] = total_iv.contains(n_out);

    const auto windows = windowed_nout(records, profile.window, profile.interval);
    const auto window_hi = acceptance_interval(profile.window, profile.alpha).hi;
    json w = to_json(windows);
    w["hi"] = window_hi;
    w["expected"] = static_cast<double>(profile.window) * profile.alpha;
    json flagged = json::array();
    for (std::size_t i = 0; i < windows.counts.size(); ++i) {
        if (windows.counts[i] <= window_hi) continue;
        const std::size_t first = i * profile.window;
        const std::size_t last = std::min(records.size(), first + profile.window) - 1;
        const auto t0 = parse_iso8601_utc(records[first].timestamp);
        const auto t1 = parse_iso8601_utc(records[last].timestamp);
        json f{{"window", i},
               {"n_out", windows.counts[i]},
               {"from", records[first].timestamp},
               {"to", records[last].timestamp}};
        if (!telemetry.empty()) f["telemetry"] = to_json(telemetry.between(t0, t1));
        flagged.push_back(std::move(f));
    }
    w["flagged"] = flagged;
    s["windows"] = w;

    json daily = json::array();
    for (const auto& d : daily_nout(records, profile)) {
        daily.push_back({{"date", d.date}, {"records", d.records}, {"n_out", d.n_out}, {"expected", d.expected},
                         {"hi", d.hi}});
    }
    s["daily"] = daily;

    json scan = json::array();
    bool all_accepted = true;
    for (const auto& level : catastrophic_scan(records, kDefaultCatastrophicEpsilons)) {
        scan.push_back(to_json(level));
        all_accepted = all_accepted && level.accepted;
    }
    s["catastrophic_scan"] = scan;
    s["catastrophic_accepted"] = all_accepted;

    const double eps = *std::min_element(std::begin(kDefaultCatastrophicEpsilons), std::end(kDefaultCatastrophicEpsilons));
    json extreme = json::array();
    for (const auto& r : records) {
        if (r.p >= eps && r.p <= 1.0 - eps) continue;
        json e{{"timestamp", r.timestamp}, {"run_id", r.run_id}, {"test_name", r.test_name},
               {"statistic_index", r.statistic_index}, {"p_value", r.p}};
        if (!telemetry.empty()) {
            const auto t = parse_iso8601_utc(r.timestamp);
            e["telemetry"] = to_json(telemetry.between(t, t));
        }
        extreme.push_back(std::move(e));
    }
    s["catastrophic_records"] = extreme;
    return s;
}

}  // namespace

std::string ratio_csv_header() { return "timestamp,run_id,test_name,statistic_index,ratio,threshold"; }

std::string ratio_csv_row(const RatioRecord& r)
{
    std::ostringstream os;
    os << r.timestamp << ',' << r.run_id << ',' << r.test_name << ',' << r.statistic_index << ','
       << fmt("%.17g", r.ratio) << ',' << fmt("%.17g", r.threshold);
    return os.str();
}

std::vector<RatioRecord> parse_ratio_csv(const std::string& text)
{
    std::vector<RatioRecord> out;
    for_each_row(text, ratio_csv_header(), 6, "ratios", [&](const auto& f, std::size_t ln) {
        RatioRecord r;
        r.timestamp = std::string(f[0]);
        r.run_id = number<std::int64_t>(f[1], ln, "ratios");
        r.test_name = std::string(f[2]);
        r.statistic_index = number<std::int64_t>(f[3], ln, "ratios");
        r.ratio = number<double>(f[4], ln, "ratios");
        r.threshold = number<double>(f[5], ln, "ratios");
        out.push_back(std::move(r));
    });
    return out;
}

std::vector<LaserTelemetry> parse_telemetry_csv(const std::string& text)
{
    std::vector<LaserTelemetry> out;
    for_each_row(text, telemetry_csv_header(), 3, "telemetry", [&](const auto& f, std::size_t ln) {
        LaserTelemetry t;
        t.step = out.size();
        t.timestamp = std::string(f[0]);
        parse_iso8601_utc(t.timestamp);
        t.power_mw = number<double>(f[1], ln, "telemetry");
        t.temperature_c = number<double>(f[2], ln, "telemetry");
        out.push_back(std::move(t));
    });
    return out;
}

std::string alarm_csv_header() { return "timestamp,kind,observed,threshold"; }

std::string alarm_csv_row(const AlarmEvent& e)
{
    return e.timestamp + ',' + to_string(e.kind) + ',' + fmt("%.17g", e.observed) + ',' + fmt("%.17g", e.threshold);
}

std::vector<AlarmEvent> parse_alarm_csv(const std::string& text)
{
    constexpr AlarmKind kinds[] = {AlarmKind::power, AlarmKind::shannon_entropy, AlarmKind::min_entropy,
                                   AlarmKind::background_mean, AlarmKind::postfir_uniformity};
    std::vector<AlarmEvent> out;
    for_each_row(text, alarm_csv_header(), 4, "alarms", [&](const auto& f, std::size_t ln) {
        AlarmEvent e;
        e.timestamp = std::string(f[0]);
        const auto it = std::find_if(std::begin(kinds), std::end(kinds), [&](AlarmKind k) { return to_string(k) == f[1]; });
        if (it == std::end(kinds)) throw InputError("alarms line " + std::to_string(ln) + ": unknown kind");
        e.kind = *it;
        e.observed = number<double>(f[2], ln, "alarms");
        e.threshold = number<double>(f[3], ln, "alarms");
        out.push_back(std::move(e));
    });
    return out;
}

std::vector<DailyCount> daily_nout(std::span<const PValueRecord> records, const BatteryProfile& profile)
{
    std::map<std::string, DailyCount> by_date;
    for (const auto& r : records) {
        auto& d = by_date[r.timestamp.substr(0, 10)];
        ++d.records;
        if (r.p < profile.interval.lo || r.p > profile.interval.hi) ++d.n_out;
    }
    std::vector<DailyCount> out;
    for (auto& [date, d] : by_date) {
        d.date = date;
        d.expected = static_cast<double>(d.records) * profile.alpha;
        d.hi = acceptance_interval(d.records, profile.alpha).hi;
        out.push_back(d);
    }
    return out;
}

std::vector<WeeklyRatio> weekly_ratios(std::span<const RatioRecord> ratios)
{
    if (ratios.empty()) return {};
    std::int64_t t0 = parse_iso8601_utc(ratios.front().timestamp);
    for (const auto& r : ratios) t0 = std::min(t0, parse_iso8601_utc(r.timestamp));
    const std::int64_t day0 = t0 / 86400;

    std::map<std::pair<int, std::string>, WeeklyRatio> acc;
    for (const auto& r : ratios) {
        const int week = static_cast<int>((parse_iso8601_utc(r.timestamp) / 86400 - day0) / 7);
        auto& w = acc[{week, family_base(r.test_name)}];
        ++w.count;
        w.mean_ratio += r.ratio;
        w.mean_threshold += r.threshold;
    }
    std::vector<WeeklyRatio> out;
    for (auto& [key, w] : acc) {
        w.week = key.first;
        w.test_name = key.second;
        w.mean_ratio /= static_cast<double>(w.count);
        w.mean_threshold /= static_cast<double>(w.count);
        w.passed = w.mean_ratio >= w.mean_threshold;
        out.push_back(w);
    }
    return out;
}

json summarize(const ReportInputs& in)
{
    if (in.ledger.empty()) throw InputError("summarize: ledger is empty");
    const TelemetryIndex telemetry(in.telemetry);

    std::map<std::string, std::vector<PValueRecord>> by_battery;
    for (const auto& r : in.ledger) by_battery[r.battery].push_back(r);

    json report;
    report["config_hash"] = in.config_hash;
    json batteries = json::object();
    bool totals_inside = true;
    bool catastrophic_ok = true;
    for (const auto& [name, records] : by_battery) {
        BatteryProfile profile;
        try {
            profile = profile_by_name(name);
        } catch (const ConfigError&) {
            continue;  // unknown batteries are kept in the ledger but not analysed
        }
        auto s = battery_section(records, profile, telemetry);
        totals_inside = totals_inside && s["inside"].get<bool>();
        catastrophic_ok = catastrophic_ok && s["catastrophic_accepted"].get<bool>();
        batteries[name] = std::move(s);
    }
    report["batteries"] = batteries;

    json weekly = json::array();
    bool ratios_pass = true;
    for (const auto& w : weekly_ratios(in.ratios)) {
        weekly.push_back({{"week", w.week}, {"test_name", w.test_name}, {"count", w.count},
                          {"mean_ratio", w.mean_ratio}, {"threshold", w.mean_threshold}, {"passed", w.passed}});
        ratios_pass = ratios_pass && w.passed;
    }
    report["weekly_ratios"] = weekly;

    json alarms = json::array();
    for (const auto& a : in.alarms) alarms.push_back(to_json(a));
    report["alarms"] = alarms;
    if (!in.telemetry.empty()) report["telemetry"] = to_json(aggregate(in.telemetry));

    json daily = json::array();
    for (const auto& d : in.daily) {
        daily.push_back({{"day", d.day}, {"power_mw_mean", d.power_mw_mean}, {"shannon_bits", d.shannon_bits},
                         {"min_entropy_bits", d.min_entropy_bits}});
    }
    report["daily"] = daily;

    report["verdict"] = {{"totals_inside", totals_inside},
                         {"catastrophic_accepted", catastrophic_ok},
                         {"ratios_pass", ratios_pass},
                         {"alarms", in.alarms.size()},
                         {"pass", totals_inside && catastrophic_ok && ratios_pass && in.alarms.empty()}};
    return report;
}

nlohmann::json write_report(const std::string& dir, const ReportInputs& in)
{
    namespace fs = std::filesystem;
    const auto report = summarize(in);
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError(std::string("cannot write ") + name);
        return out;
    };
    open("report.json") << report.dump(2) << '\n';

    auto daily_csv = [&](const char* file, const char* battery) {
        auto out = open(file);
        out << "date,records,n_out,expected,hi\n";
        const auto& b = report["batteries"];
        if (!b.contains(battery)) return;
        for (const auto& d : b[battery]["daily"]) {
            out << d["date"].get<std::string>() << ',' << d["records"].get<std::uint64_t>() << ','
                << d["n_out"].get<std::uint64_t>() << ',' << fmt("%.6g", d["expected"].get<double>()) << ','
                << d["hi"].get<std::uint64_t>() << '\n';
        }
    };
    daily_csv("fig5_daily_nout.csv", "bigcrush");
    daily_csv("fig6_daily_nout.csv", "sp800-22");

    auto fig7 = open("fig7_weekly_ratios.csv");
    fig7 << "week,test_name,count,mean_ratio,threshold,passed\n";
    for (const auto& w : weekly_ratios(in.ratios)) {
        fig7 << w.week << ',' << w.test_name << ',' << w.count << ',' << fmt("%.6f", w.mean_ratio) << ','
             << fmt("%.6f", w.mean_threshold) << ',' << (w.passed ? 1 : 0) << '\n';
    }
    return report;
}

ReportInputs load_report_inputs(const std::string& dir)
{
    namespace fs = std::filesystem;
    const fs::path d(dir);
    ReportInputs in;
    in.ledger = read_ledger((d / "ledger.csv").string());
    if (fs::exists(d / "ratios.csv")) in.ratios = parse_ratio_csv(read_file(d / "ratios.csv"));
    if (fs::exists(d / "telemetry.csv")) in.telemetry = parse_telemetry_csv(read_file(d / "telemetry.csv"));
    if (fs::exists(d / "daily.csv")) in.daily = parse_daily_csv(read_file(d / "daily.csv"));
    if (fs::exists(d / "alarms.csv")) in.alarms = parse_alarm_csv(read_file(d / "alarms.csv"));
    if (fs::exists(d / "state.json")) {
        const auto state = json::parse(read_file(d / "state.json"), nullptr, false);
        if (state.is_object() && state.contains("config_hash")) in.config_hash = state["config_hash"].get<std::string>();
    }
    return in;
}

}  // namespace qrng
