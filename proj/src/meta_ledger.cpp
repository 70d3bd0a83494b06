#include "qrng/meta_ledger.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "qrng/errors.hpp"
#include "qrng/sim_clock.hpp"

namespace qrng {

CountInterval acceptance_interval(std::uint64_t n, double alpha, double k_sigma)
{
    if (n == 0) throw ConfigError("acceptance_interval: n must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("acceptance_interval: alpha must be in (0,1)");
    if (!(k_sigma >= 0.0)) throw ConfigError("acceptance_interval: k_sigma must be non-negative");
    const double nd = static_cast<double>(n);
    const double mean = nd * alpha;
    const double sigma = std::sqrt(nd * alpha * (1.0 - alpha));
    auto bound = [nd](double x) {
        return static_cast<std::uint64_t>(std::clamp(std::round(x), 0.0, nd));
    };
    return {bound(mean - k_sigma * sigma), bound(mean + k_sigma * sigma)};
}

namespace {

bool outside(double p, Interval iv) noexcept { return p < iv.lo || p > iv.hi; }

}  // namespace

std::uint64_t count_outside(std::span<const PValueRecord> records, Interval interval)
{
    std::uint64_t n = 0;
    for (const auto& r : records) n += outside(r.p, interval) ? 1 : 0;
    return n;
}

std::uint64_t count_outside(std::span<const double> p_values, Interval interval)
{
    std::uint64_t n = 0;
    for (double p : p_values) n += outside(p, interval) ? 1 : 0;
    return n;
}

WindowedCounts windowed_nout(std::span<const PValueRecord> records, std::size_t window_size,
                             Interval interval)
{
    if (window_size == 0) throw ConfigError("windowed_nout: window_size must be >= 1");
    WindowedCounts w;
    w.window_size = window_size;
    const std::size_t full = records.size() / window_size;
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < full; ++i) {
        const auto c = count_outside(records.subspan(i * window_size, window_size), interval);
        w.counts.push_back(c);
        sum += c;
    }
    if (full * window_size < records.size()) {
        w.counts.push_back(count_outside(records.subspan(full * window_size), interval));
        w.last_partial = true;
    }
    w.mean = full > 0 ? static_cast<double>(sum) / static_cast<double>(full) : 0.0;
    return w;
}

std::vector<CatastrophicLevel> catastrophic_scan(std::span<const PValueRecord> records,
                                                 std::span<const double> epsilons)
{
    std::vector<CatastrophicLevel> out;
    for (double eps : epsilons) {
        if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("catastrophic_scan: epsilon must be in (0, 0.5)");
        CatastrophicLevel level;
        level.epsilon = eps;
        level.count = count_outside(records, Interval{eps, 1.0 - eps});
        if (!records.empty()) {
            level.acceptance = acceptance_interval(records.size(), 2.0 * eps);
            level.accepted = level.acceptance.contains(level.count);
        }
        out.push_back(level);
    }
    return out;
}

BatteryProfile bigcrush_profile() { return {"bigcrush", {0.001, 0.999}, 0.002, 254, 1016}; }

BatteryProfile sp800_22_profile() { return {"sp800-22", {1e-4, 1.0}, 1e-4, 188, 7520}; }

BatteryProfile profile_by_name(const std::string& name)
{
    if (name == "bigcrush") return bigcrush_profile();
    if (name == "sp800-22") return sp800_22_profile();
    throw ConfigError("unknown battery profile '" + name + "'");
}

std::string ledger_csv_header() { return "timestamp,battery,run_id,test_name,statistic_index,p_value"; }

std::string ledger_csv_row(const PValueRecord& r)
{
    char p[40];
    std::snprintf(p, sizeof p, "%.17g", r.p);
    std::ostringstream os;
    os << r.timestamp << ',' << r.battery << ',' << r.run_id << ',' << r.test_name << ','
       << r.statistic_index << ',' << p;
    return os.str();
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out)
{
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end && !s.empty();
}

}  // namespace

std::vector<PValueRecord> parse_ledger_csv(const std::string& text)
{
    std::vector<PValueRecord> out;
    std::vector<std::string> problems;
    std::set<std::tuple<std::string, std::int64_t, std::string, std::int64_t>> keys;

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line == ledger_csv_header()) continue;
            problems.push_back("line " + std::to_string(lineno) + ": missing ledger header");
            continue;
        }
        const auto f = split(line, ',');
        auto bad = [&](const std::string& why) { problems.push_back("line " + std::to_string(lineno) + ": " + why); };
        if (f.size() != 6) {
            bad("expected 6 fields, got " + std::to_string(f.size()));
            continue;
        }
        PValueRecord r;
        r.timestamp = std::string(f[0]);
        r.battery = std::string(f[1]);
        r.test_name = std::string(f[3]);
        try {
            parse_iso8601_utc(r.timestamp);
        } catch (const InputError&) {
            bad("bad timestamp '" + r.timestamp + "'");
            continue;
        }
        if (r.battery.empty() || r.test_name.empty()) {
            bad("empty battery or test name");
            continue;
        }
        if (!parse_number(f[2], r.run_id) || !parse_number(f[4], r.statistic_index)) {
            bad("bad run_id or statistic_index");
            continue;
        }
        if (!parse_number(f[5], r.p)) {
            bad("bad p_value '" + std::string(f[5]) + "'");
            continue;
        }
        if (!(r.p >= 0.0 && r.p <= 1.0)) {
            bad("p_value " + std::string(f[5]) + " outside [0,1]");
            continue;
        }
        if (!keys.emplace(r.battery, r.run_id, r.test_name, r.statistic_index).second) {
            bad("duplicate record key");
            continue;
        }
        out.push_back(std::move(r));
    }
    if (!problems.empty()) {
        std::string msg = "ledger rejected (" + std::to_string(problems.size()) + " bad rows)";
        const std::size_t shown = std::min<std::size_t>(problems.size(), 20);
        for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + problems[i];
        if (shown < problems.size()) msg += "\n  ...";
        throw InputError(msg);
    }
    return out;
}

std::vector<PValueRecord> read_ledger(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open ledger '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ledger_csv(ss.str());
}

void append_ledger(const std::string& path, std::span<const PValueRecord> records)
{
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw InputError("cannot write ledger '" + path + "'");
    if (fresh) out << ledger_csv_header() << '\n';
    for (const auto& r : records) out << ledger_csv_row(r) << '\n';
    if (!out) throw InputError("write failed on ledger '" + path + "'");
}

IngestReport validate_ingest(std::span<const PValueRecord> records, const BatteryProfile& profile)
{
    IngestReport rep;
    rep.records = records.size();
    std::map<std::int64_t, std::size_t> per_run;
    std::set<std::string> foreign;
    for (const auto& r : records) {
        if (r.battery != profile.name) foreign.insert(r.battery);
        ++per_run[r.run_id];
    }
    for (const auto& b : foreign) {
        rep.warnings.push_back("battery '" + b + "' does not match profile '" + profile.name + "'");
    }
    rep.runs = per_run.size();
    for (const auto& [run, n] : per_run) {
        if (profile.per_run != 0 && n != profile.per_run) {
            rep.warnings.push_back("run " + std::to_string(run) + ": " + std::to_string(n) +
                                   " p-values, expected " + std::to_string(profile.per_run));
        }
    }
    return rep;
}

nlohmann::json to_json(const CountInterval& c) { return nlohmann::json::array({c.lo, c.hi}); }

nlohmann::json to_json(const WindowedCounts& w)
{
    return {{"window_size", w.window_size}, {"counts", w.counts}, {"last_partial", w.last_partial}, {"mean", w.mean}};
}

nlohmann::json to_json(const CatastrophicLevel& c)
{
    return {{"epsilon", c.epsilon}, {"count", c.count}, {"acceptance", to_json(c.acceptance)}, {"accepted", c.accepted}};
}

}  // namespace qrng
