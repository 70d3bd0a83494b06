#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "qrng/config.hpp"
#include "qrng/errors.hpp"
#include "qrng/health.hpp"
#include "qrng/histogram.hpp"
#include "qrng/monitor.hpp"
#include "qrng/rng.hpp"
#include "qrng/source.hpp"

using namespace qrng;

namespace {
#include "reference_values.inc"

Histogram from_pmf(std::span<const double> pmf, double scale)
{
    Histogram h(pmf.size());
    for (std::size_t k = 0; k < pmf.size(); ++k) h.add(k, static_cast<std::uint64_t>(std::llround(pmf[k] * scale)));
    return h;
}

Histogram sample_pmf(std::span<const double> pmf, std::size_t n, std::uint64_t seed)
{
    std::vector<double> cdf(pmf.size());
    std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
    CounterRng rng(seed, Stream::test_data);
    Histogram h(pmf.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * cdf.back();
        const auto k = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), pmf.size() - 1);
        h.add(k);
    }
    return h;
}

}  // namespace

TEST(Histogram, Update)
{
    Histogram h;
    const Histogram empty;
    h.update(std::span<const std::uint16_t>{});
    EXPECT_EQ(h, empty);
    const std::vector<std::uint16_t> codes{0, 0, 1023};
    h.update(codes);
    EXPECT_EQ(h[0], 2u);
    EXPECT_EQ(h[1023], 1u);
    EXPECT_EQ(h.total(), 3u);
}

TEST(Histogram, OutOfRangeLeavesUnchanged)
{
    Histogram h(256);
    const std::vector<std::uint16_t> codes{1, 2, 256};
    EXPECT_THROW(h.update(codes), InputError);
    EXPECT_EQ(h.total(), 0u);
    EXPECT_THROW(h.merge(Histogram(1024)), InputError);
}

TEST(Histogram, MergeEqualsUpdate)
{
    const auto f = generate_frame(SourceConfig{}, 3000, 0);
    const std::span<const std::uint16_t> all(f.foreground);
    Histogram whole;
    whole.update(all);
    Histogram a, b, c;
    a.update(all.first(1000));
    b.update(all.subspan(1000, 1500));
    c.update(all.subspan(2500));
    EXPECT_EQ(merged(merged(a, b), c), whole);
    EXPECT_EQ(merged(a, merged(b, c)), whole);
    EXPECT_EQ(merged(merged(c, a), b), whole);
    Histogram d = a;
    d.update(all.subspan(1000));
    EXPECT_EQ(d, whole);
}

TEST(Entropy, UniformAndPointMass)
{
    Histogram u;
    for (std::size_t k = 0; k < 1024; ++k) u.add(k, 3);
    EXPECT_DOUBLE_EQ(shannon_entropy(u), 10.0);
    EXPECT_DOUBLE_EQ(min_entropy(u), 10.0);
    Histogram p;
    p.add(17, 1000);
    EXPECT_EQ(shannon_entropy(p), 0.0);
    EXPECT_EQ(min_entropy(p), 0.0);
    EXPECT_THROW(shannon_entropy(Histogram{}), InsufficientSampleError);
    EXPECT_THROW(min_entropy(Histogram{}), InsufficientSampleError);
}

TEST(Entropy, ExactArcsineMatchesOracle)
{
    const auto pmf = ideal_arcsine_pmf();
    EXPECT_NEAR(shannon_entropy(pmf), kArcsineShannonBits, 1e-9);
    EXPECT_NEAR(min_entropy(pmf), kArcsineMinEntropyBits, 1e-9);
    EXPECT_NEAR(min_entropy(pmf), -std::log2(2.0 / std::numbers::pi * std::asin(1.0 / 32.0)), 1e-9);
    // Counts proportional to the pmf give the same figures.
    const auto h = from_pmf(pmf, 1e15);
    EXPECT_NEAR(shannon_entropy(h), kArcsineShannonBits, 1e-9);
    EXPECT_NEAR(min_entropy(h), kArcsineMinEntropyBits, 1e-9);
}

TEST(Entropy, ReportPerBitFigures)
{
    const auto r = entropy_report(from_pmf(ideal_arcsine_pmf(), 1e12));
    EXPECT_DOUBLE_EQ(r.per_bit_shannon, r.shannon_bits / 10);
    EXPECT_DOUBLE_EQ(r.per_bit_min, r.min_entropy_bits / 10);
    EXPECT_LE(r.min_entropy_bits, r.shannon_bits);
}

TEST(Entropy, InequalityChain)
{
    CounterRng rng(8, Stream::test_data);
    for (int t = 0; t < 50; ++t) {
        Histogram h(t % 2 ? 256 : 1024);
        const int n = 1 + static_cast<int>(rng.uniform() * 5000);
        for (int i = 0; i < n; ++i) {
            const double u = rng.uniform();
            h.add(static_cast<std::size_t>(u * u * h.size()));
        }
        const double hs = shannon_entropy(h), hm = min_entropy(h);
        EXPECT_LE(hm, hs + 1e-12);
        EXPECT_LE(hs, std::log2(static_cast<double>(h.size())) + 1e-12);
        EXPECT_GE(hm, 0.0);
    }
}

TEST(ArcsinePmf, IdealProperties)
{
    const auto pmf = ideal_arcsine_pmf();
    ASSERT_EQ(pmf.size(), 1024u);
    EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-12);
    for (int k = 0; k < 512; ++k) EXPECT_NEAR(pmf[k], pmf[1023 - k], 1e-15);
    EXPECT_NEAR(pmf[0], kArcsineP0, 1e-15);
    EXPECT_NEAR(pmf[0], 2.0 / std::numbers::pi * std::asin(1.0 / 32.0), 1e-15);
    EXPECT_NEAR(pmf[0], 0.019899, 2e-6);
    EXPECT_NEAR(pmf[511], kArcsineP511, 1e-15);
    EXPECT_EQ(arcsine_pmf(ideal_arcsine_config()), pmf);
}

TEST(ArcsinePmf, GeneralModeNormalized)
{
    const auto cfg = load_trial_config(QRNG_DEFAULT_CONFIG).source;
    EXPECT_FALSE(is_ideal(cfg));
    const auto pmf = arcsine_pmf(cfg);
    ASSERT_EQ(pmf.size(), 1024u);
    EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-12);
    EXPECT_NEAR(shannon_entropy(pmf), 9.27, 0.02);
    EXPECT_NEAR(min_entropy(pmf), 8.56, 0.04);
}

TEST(ArcsinePmf, NoiseNeverLowersMinEntropy)
{
    SourceConfig cfg;
    cfg.gain = 0.6;
    cfg.offset = 200.0;
    double prev = -1.0;
    for (double sigma : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 50.0, 80.0}) {
        cfg.noise_sigma = sigma;
        const double hm = min_entropy(arcsine_pmf(cfg));
        EXPECT_GE(hm, prev - 1e-12) << sigma;
        prev = hm;
    }
}

TEST(ForegroundGof, Examples)
{
    const auto pmf = ideal_arcsine_pmf();
    EXPECT_GT(foreground_gof(sample_pmf(pmf, 1'000'000, 1), pmf), 0.001);

    Histogram uniform;
    for (std::size_t k = 0; k < 1024; ++k) uniform.add(k, 1000);
    EXPECT_LT(foreground_gof(uniform, pmf), 1e-6);

    // Counts exactly proportional to the pmf (2^20 = 1024 * 1024 per unit).
    std::vector<double> flat(1024, 1.0 / 1024);
    EXPECT_DOUBLE_EQ(foreground_gof(uniform, flat), 1.0);

    Histogram tiny;
    tiny.add(3, 100);
    EXPECT_THROW(foreground_gof(tiny, pmf), InsufficientSampleError);
}

TEST(Alarms, NominalTelemetryIsQuiet)
{
    SourceConfig cfg;
    TelemetryModel model(cfg, 24, 1'000'000);
    std::vector<LaserTelemetry> readings;
    for (int i = 0; i < 71 * 24; ++i) readings.push_back(model.step());
    EXPECT_TRUE(evaluate_alarms(readings, {}, cfg).empty());
}

TEST(Alarms, PowerDriftCrossing)
{
    SourceConfig cfg;
    cfg.power_rel_sigma = 0.0;
    const std::uint64_t per_day = 1'000'000;
    cfg.faults.push_back({FaultKind::power_drift, 5.0, 0, per_day, per_day});
    TelemetryModel model(cfg, 24, per_day);
    AlarmMonitor monitor(cfg.power_nominal_mw, cfg.bg_offset);
    std::optional<std::uint64_t> first_alarm, first_cross;
    for (int i = 0; i < 72; ++i) {
        const auto t = model.step();
        if (!first_cross && std::abs(t.power_mw / 5.03 - 1.0) > 0.025) first_cross = t.step;
        if (auto a = monitor.observe(t); a && !first_alarm) {
            first_alarm = t.step;
            EXPECT_EQ(a->kind, AlarmKind::power);
            EXPECT_NEAR(a->threshold, 5.03 * 1.025, 1e-12);
        }
    }
    ASSERT_TRUE(first_alarm && first_cross);
    EXPECT_EQ(*first_alarm, *first_cross);
}

TEST(Alarms, SaturationLowersMinEntropy)
{
    auto cfg = load_trial_config(QRNG_DEFAULT_CONFIG).source;
    cfg.faults.push_back({FaultKind::saturation, 1.5, 0, 0, ~0ULL});
    const auto f = generate_frame(cfg, 1'000'000, 0);
    Histogram fg, bg, post(256);
    fg.update(f.foreground);
    bg.update(f.background);
    for (std::size_t k = 0; k < 256; ++k) post.add(k, 100);
    AlarmMonitor monitor(cfg.power_nominal_mw, cfg.bg_offset);
    const auto events = monitor.observe(make_health_check("2020-01-01T00:00:00Z", fg, bg, post));
    bool min_alarm = false;
    for (const auto& e : events) min_alarm = min_alarm || e.kind == AlarmKind::min_entropy;
    EXPECT_TRUE(min_alarm);
}

TEST(Alarms, BackgroundAndPostFilterRules)
{
    AlarmMonitor monitor(5.03, 12.0);
    HealthCheck ok{"t", {9.3, 8.6, 0.93, 0.86}, 12.5, 0.5};
    EXPECT_TRUE(monitor.observe(ok).empty());

    HealthCheck shifted = ok;
    shifted.background_mean = 14.5;
    const auto ev = monitor.observe(shifted);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].kind, AlarmKind::background_mean);

    HealthCheck bad = ok;
    bad.postfir_p = 1e-6;
    EXPECT_TRUE(monitor.observe(bad).empty());
    EXPECT_TRUE(monitor.observe(bad).empty());
    EXPECT_EQ(monitor.postfir_streak(), 2);
    const auto third = monitor.observe(bad);
    ASSERT_EQ(third.size(), 1u);
    EXPECT_EQ(third[0].kind, AlarmKind::postfir_uniformity);
    // A good check resets the streak.
    EXPECT_TRUE(monitor.observe(ok).empty());
    EXPECT_EQ(monitor.postfir_streak(), 0);
}

TEST(Alarms, EvaluateRequiresInput)
{
    EXPECT_THROW(evaluate_alarms({}, {}, SourceConfig{}), InputError);
}

TEST(Calibration, ReachesTargetsNearPinnedConfig)
{
    const auto cal = calibrate_source();
    EXPECT_NEAR(cal.shannon_bits, 9.27, 0.02);
    EXPECT_NEAR(cal.min_entropy_bits, 8.56, 0.04);
    const auto pinned = load_trial_config(QRNG_DEFAULT_CONFIG).source;
    EXPECT_NEAR(cal.gain, pinned.gain, 1e-9);
    EXPECT_NEAR(cal.offset, pinned.offset, 1e-6);
    EXPECT_NEAR(cal.noise_sigma, pinned.noise_sigma, 1e-9);
}

TEST(Calibration, UnreachableTargetThrows)
{
    CalibrationTarget t;
    t.shannon_bits = 9.9;
    t.min_entropy_bits = 5.0;
    EXPECT_THROW(calibrate_source(t), CalibrationError);
}

TEST(Snapshot, DailyCsvRoundTrip)
{
    EXPECT_EQ(daily_csv_header(), "day,power_mw_mean,shannon_bits,min_entropy_bits");
    const std::vector<DailyAggregate> rows{{0, 5.0312, 9.2712, 8.5634}, {1, 5.0291, 9.2698, 8.5601}};
    std::string text = daily_csv_header() + "\n";
    for (const auto& r : rows) text += daily_csv_row(r) + "\n";
    const auto back = parse_daily_csv(text);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1].day, 1);
    EXPECT_DOUBLE_EQ(back[1].power_mw_mean, 5.0291);
    EXPECT_DOUBLE_EQ(back[0].min_entropy_bits, 8.5634);
    EXPECT_THROW(parse_daily_csv(daily_csv_header() + "\n1,x,2,3\n"), InputError);
}

TEST(Snapshot, JsonCarriesHistogramsAndEntropy)
{
    HealthSnapshot s;
    s.timestamp = "2020-01-02T00:00:00Z";
    s.foreground.add(5, 10);
    s.entropy = entropy_report(s.foreground);
    s.alarms.push_back({AlarmKind::power, s.timestamp, 5.2, 0.025});
    const auto j = to_json(s);
    EXPECT_EQ(j["timestamp"], s.timestamp);
    EXPECT_EQ(j["histograms"]["foreground"].size(), 1024u);
    EXPECT_EQ(j["histograms"]["postfir"].size(), 256u);
    EXPECT_EQ(j["alarms"].size(), 1u);
    EXPECT_EQ(j["alarms"][0]["kind"], "power");
    EXPECT_TRUE(j["entropy"].contains("per_bit_min_entropy"));
}
