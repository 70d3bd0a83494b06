#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "qrng/errors.hpp"
#include "qrng/sp800_22.hpp"
#include "qrng/stats.hpp"

namespace qrng::sp800_22 {

namespace {

constexpr std::size_t kMinSecondOrderSamples = 100;

struct NamedTest {
    TestId id;
    const char* name;
};

constexpr NamedTest kNames[] = {
    {TestId::frequency, "Frequency"},
    {TestId::block_frequency, "BlockFrequency"},
    {TestId::cumulative_sums, "CumulativeSums"},
    {TestId::runs, "Runs"},
    {TestId::longest_run, "LongestRun"},
    {TestId::rank, "Rank"},
    {TestId::dft, "FFT"},
    {TestId::non_overlapping_template, "NonOverlappingTemplate"},
    {TestId::overlapping_template, "OverlappingTemplate"},
    {TestId::universal, "Universal"},
    {TestId::approximate_entropy, "ApproximateEntropy"},
    {TestId::random_excursions, "RandomExcursions"},
    {TestId::random_excursions_variant, "RandomExcursionsVariant"},
    {TestId::serial, "Serial"},
    {TestId::linear_complexity, "LinearComplexity"},
};

std::string template_bits(std::uint32_t t, int m)
{
    std::string s(static_cast<std::size_t>(m), '0');
    for (int i = 0; i < m; ++i) {
        if ((t >> (m - 1 - i)) & 1u) s[static_cast<std::size_t>(i)] = '1';
    }
    return s;
}

}  // namespace

std::string test_name(TestId id)
{
    for (const auto& n : kNames) {
        if (n.id == id) return n.name;
    }
    return "Unknown";
}

std::optional<TestId> test_from_name(const std::string& name)
{
    for (const auto& n : kNames) {
        if (name == n.name) return n.id;
    }
    return std::nullopt;
}

BatteryParams BatteryParams::paper_scale() { return {}; }

BatteryParams BatteryParams::desk_scale()
{
    BatteryParams p;
    p.substring_len = 100'000;
    p.num_substrings = 100;
    p.serial_m = 13;
    return p;
}

void BatteryParams::validate() const
{
    if (substring_len == 0 || num_substrings == 0) throw ConfigError("battery: empty substring layout");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("battery: alpha must be in (0,1)");
    if (!(uniformity_floor > 0.0 && uniformity_floor < 1.0)) throw ConfigError("battery: uniformity floor must be in (0,1)");
    if (block_frequency_m < 1 || linear_complexity_m < 2 || overlapping_block < overlapping_m) {
        throw ConfigError("battery: invalid block lengths");
    }
    if (template_m < 2 || template_m > 21 || overlapping_m < 2 || overlapping_m > 21) {
        throw ConfigError("battery: template length out of range");
    }
    if (serial_m < 3 || serial_m > 24 || approximate_entropy_m < 1 || approximate_entropy_m > 23) {
        throw ConfigError("battery: serial/approximate-entropy block length out of range");
    }
    if (non_overlapping_blocks < 1) throw ConfigError("battery: non-overlapping template needs >= 1 block");
}

nlohmann::json to_json(const BatteryParams& p)
{
    return {
        {"substring_len", p.substring_len},
        {"num_substrings", p.num_substrings},
        {"block_frequency_m", p.block_frequency_m},
        {"template_m", p.template_m},
        {"non_overlapping_blocks", p.non_overlapping_blocks},
        {"overlapping_m", p.overlapping_m},
        {"overlapping_block", p.overlapping_block},
        {"serial_m", p.serial_m},
        {"approximate_entropy_m", p.approximate_entropy_m},
        {"linear_complexity_m", p.linear_complexity_m},
        {"alpha", p.alpha},
        {"uniformity_floor", p.uniformity_floor},
    };
}

std::string to_string(Status s)
{
    switch (s) {
    case Status::ok: return "ok";
    case Status::too_short: return "too_short";
    case Status::not_applicable: return "not_applicable";
    }
    return "unknown";
}

std::size_t variant_count(TestId id, const BatteryParams& params)
{
    switch (id) {
    case TestId::cumulative_sums:
    case TestId::serial: return 2;
    case TestId::non_overlapping_template: return aperiodic_templates(params.template_m).size();
    case TestId::random_excursions: return 8;
    case TestId::random_excursions_variant: return 18;
    default: return 1;
    }
}

std::string variant_label(TestId id, std::size_t variant, const BatteryParams& params)
{
    switch (id) {
    case TestId::cumulative_sums: return variant == 0 ? "forward" : "backward";
    case TestId::serial: return variant == 0 ? "delta1" : "delta2";
    case TestId::non_overlapping_template:
        return template_bits(aperiodic_templates(params.template_m).at(variant), params.template_m);
    case TestId::random_excursions: {
        const int x = variant < 4 ? static_cast<int>(variant) - 4 : static_cast<int>(variant) - 3;
        return "x=" + std::to_string(x);
    }
    case TestId::random_excursions_variant: {
        const int x = variant < 9 ? static_cast<int>(variant) - 9 : static_cast<int>(variant) - 8;
        return "x=" + std::to_string(x);
    }
    default: return "";
    }
}

TestOutcome run_test(TestId id, const BitString& s, const BatteryParams& p)
{
    switch (id) {
    case TestId::frequency: return frequency(s);
    case TestId::block_frequency: return block_frequency(s, p.block_frequency_m);
    case TestId::cumulative_sums: return cumulative_sums(s);
    case TestId::runs: return runs(s);
    case TestId::longest_run: return longest_run(s);
    case TestId::rank: return rank(s);
    case TestId::dft: return dft(s);
    case TestId::non_overlapping_template: return non_overlapping_template(s, p.template_m, p.non_overlapping_blocks);
    case TestId::overlapping_template: return overlapping_template(s, p.overlapping_m, p.overlapping_block);
    case TestId::universal: return universal(s);
    case TestId::approximate_entropy: return approximate_entropy(s, p.approximate_entropy_m);
    case TestId::random_excursions: return random_excursions(s);
    case TestId::random_excursions_variant: return random_excursions_variant(s);
    case TestId::serial: return serial(s, p.serial_m);
    case TestId::linear_complexity: return linear_complexity_test(s, p.linear_complexity_m);
    }
    throw ConfigError("unknown test id");
}

std::vector<BitString> split_substrings(const BitString& s, const BatteryParams& params)
{
    const std::size_t need = params.substring_len * params.num_substrings;
    if (s.size() < need) {
        throw InputError("input of " + std::to_string(s.size()) + " bits is shorter than L*len = " +
                         std::to_string(need));
    }
    std::vector<BitString> out;
    out.reserve(params.num_substrings);
    for (std::size_t i = 0; i < params.num_substrings; ++i) {
        out.push_back(s.slice(i * params.substring_len, params.substring_len));
    }
    return out;
}

double ratio_threshold(std::size_t samples, double alpha)
{
    return (1.0 - alpha) - 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(samples));
}

PassingRatio passing_ratio(std::span<const double> p_values, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("passing_ratio: alpha must be in (0,1)");
    if (p_values.size() < kMinSecondOrderSamples) {
        throw InsufficientSampleError("passing ratio needs at least 100 p-values");
    }
    PassingRatio r;
    r.count = p_values.size();
    const auto passed = std::count_if(p_values.begin(), p_values.end(), [alpha](double p) { return p >= alpha; });
    r.ratio = static_cast<double>(passed) / static_cast<double>(r.count);
    r.threshold = ratio_threshold(r.count, alpha);
    r.passed = r.ratio >= r.threshold;
    return r;
}

Uniformity uniformity_gof(std::span<const double> p_values, double floor)
{
    if (p_values.size() < kMinSecondOrderSamples) {
        throw InsufficientSampleError("uniformity check needs at least 100 p-values");
    }
    Uniformity u;
    for (double p : p_values) {
        const auto bin = static_cast<std::size_t>(std::clamp(std::floor(p * 10.0), 0.0, 9.0));
        ++u.bins[bin];
    }
    const double expected = static_cast<double>(p_values.size()) / 10.0;
    for (auto b : u.bins) {
        const double d = static_cast<double>(b) - expected;
        u.chi_square += d * d / expected;
    }
    u.p_value = igamc(4.5, u.chi_square / 2.0);
    u.passed = u.p_value >= floor;
    return u;
}

RunResult run_battery(const BitString& s, const BatteryParams& params)
{
    params.validate();
    const auto substrings = split_substrings(s, params);
    const std::size_t l = substrings.size();

    // outcomes[substring][test]
    std::vector<std::vector<TestOutcome>> outcomes(l);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < l; i = next++) {
            auto& row = outcomes[i];
            row.reserve(kAllTests.size());
            for (TestId id : kAllTests) row.push_back(run_test(id, substrings[i], params));
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(params.workers, static_cast<unsigned>(l)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    RunResult result;
    result.params = params;
    for (std::size_t t = 0; t < kAllTests.size(); ++t) {
        const TestId id = kAllTests[t];
        const std::size_t variants = variant_count(id, params);
        const std::size_t base = result.families.size();
        for (std::size_t v = 0; v < variants; ++v) {
            FamilyResult f;
            f.test = id;
            f.variant = v;
            f.label = variant_label(id, v, params);
            f.p_values.reserve(l);
            result.families.push_back(std::move(f));
        }
        for (std::size_t i = 0; i < l; ++i) {
            const TestOutcome& o = outcomes[i][t];
            for (std::size_t v = 0; v < variants; ++v) {
                auto& f = result.families[base + v];
                if (o.status == Status::ok) {
                    f.p_values.push_back(o.p_values.at(v));
                } else {
                    ++f.skipped;
                }
            }
        }
        for (std::size_t v = 0; v < variants; ++v) {
            auto& f = result.families[base + v];
            if (f.p_values.size() >= kMinSecondOrderSamples) {
                f.ratio = passing_ratio(f.p_values, params.alpha);
                f.uniformity = uniformity_gof(f.p_values, params.uniformity_floor);
            }
        }
    }
    return result;
}

nlohmann::json to_json(const RunResult& r)
{
    nlohmann::json families = nlohmann::json::array();
    for (const auto& f : r.families) {
        nlohmann::json j{
            {"test", test_name(f.test)},
            {"variant", f.variant},
            {"label", f.label},
            {"applicable", f.p_values.size()},
            {"skipped", f.skipped},
            {"p_values", f.p_values},
        };
        if (f.ratio) {
            j["ratio"] = f.ratio->ratio;
            j["ratio_threshold"] = f.ratio->threshold;
            j["ratio_passed"] = f.ratio->passed;
        } else {
            j["ratio"] = nullptr;
        }
        if (f.uniformity) {
            j["uniformity_p"] = f.uniformity->p_value;
            j["uniformity_passed"] = f.uniformity->passed;
        } else {
            j["uniformity_p"] = nullptr;
        }
        families.push_back(std::move(j));
    }
    return {{"params", to_json(r.params)}, {"p_value_count", r.p_value_count()}, {"families", families}};
}

}  // namespace qrng::sp800_22
