#include <gtest/gtest.h>

#include <random>

#include "qrng/config.hpp"
#include "qrng/errors.hpp"
#include "qrng/fir.hpp"
#include "qrng/histogram.hpp"
#include "qrng/source.hpp"
#include "qrng/stats.hpp"

using namespace qrng;

TEST(BinomialCoeffs, Examples)
{
    EXPECT_EQ(binomial_coeffs(1), (std::vector<std::uint8_t>{1, 1}));
    EXPECT_EQ(binomial_coeffs(7), (std::vector<std::uint8_t>{1, 7, 21, 35, 35, 21, 7, 1}));
    EXPECT_EQ(binomial_coeffs(8), (std::vector<std::uint8_t>{1, 8, 28, 56, 70, 56, 28, 8, 1}));
}

TEST(BinomialCoeffs, ReducedModulo256)
{
    // C(10,5) = 252, C(12,6) = 924 = 3*256 + 156.
    EXPECT_EQ(binomial_coeffs(10)[5], 252);
    EXPECT_EQ(binomial_coeffs(12)[6], 156);
    // 2^k - 1 orders have only odd coefficients.
    for (int m : {7, 15, 31, 63, 127}) {
        for (auto c : binomial_coeffs(m)) EXPECT_EQ(c % 2, 1) << m;
    }
    EXPECT_EQ(binomial_coeffs(4096).size(), 4097u);
}

TEST(BinomialCoeffs, RangeChecked)
{
    EXPECT_THROW(binomial_coeffs(0), ConfigError);
    EXPECT_THROW(binomial_coeffs(4097), ConfigError);
    EXPECT_THROW(FirState(0), ConfigError);
}

TEST(FirNext, TwoTapExample)
{
    FirState f(1);
    EXPECT_EQ(f.next(3), std::nullopt);
    EXPECT_EQ(f.next(5), std::optional<std::uint8_t>(8));
}

TEST(FirNext, ImpulseReadsOutCoefficients)
{
    FirState f(7);
    std::vector<std::uint16_t> xs(20, 0);
    xs[7] = 1;
    const auto out = f.process(xs);
    const std::vector<std::uint8_t> want{1, 7, 21, 35, 35, 21, 7, 1, 0, 0, 0, 0, 0};
    EXPECT_EQ(out, want);
}

TEST(FirNext, ConstantInputVanishesForOrderEight)
{
    for (std::uint16_t c : {0, 1, 77, 255, 256, 1023}) {
        FirState f(8);
        const std::vector<std::uint16_t> xs(50, c);
        for (auto y : f.process(xs)) EXPECT_EQ(y, 0) << c;
    }
}

TEST(FirNext, RejectsOutOfRangeInput)
{
    FirState f(7);
    EXPECT_THROW(f.next(1024), InputError);
    EXPECT_EQ(f.warmup_remaining(), 7);
}

TEST(FirBlock, EmptyInputLeavesStateUnchanged)
{
    FirState f(7);
    f.next(10);
    const FirState before = f;
    EXPECT_TRUE(f.process(std::span<const std::uint16_t>{}).empty());
    EXPECT_EQ(f, before);
}

TEST(FirBlock, ConcatenationEqualsCarriedState)
{
    std::mt19937 gen(1);
    std::uniform_int_distribution<int> d(0, 1023);
    std::vector<std::uint16_t> xs(5000);
    for (auto& x : xs) x = static_cast<std::uint16_t>(d(gen));

    FirState whole(15);
    const auto expected = whole.process(xs);

    for (std::size_t cut : {0u, 3u, 15u, 16u, 2500u, 5000u}) {
        FirState f(15);
        auto out = f.process(std::span(xs).first(cut));
        f.process(std::span(xs).subspan(cut), out);
        EXPECT_EQ(out, expected) << cut;
    }
}

TEST(FirBlock, HistoryHandOffMatchesSequential)
{
    std::mt19937 gen(2);
    std::uniform_int_distribution<int> d(0, 1023);
    std::vector<std::uint16_t> xs(4000);
    for (auto& x : xs) x = static_cast<std::uint16_t>(d(gen));
    const int m = 31;

    FirState whole(m);
    const auto expected = whole.process(xs);

    // Second half filtered independently, seeded with the preceding M inputs.
    const std::size_t cut = 1700;
    FirState first(m);
    auto out = first.process(std::span(xs).first(cut));
    FirState second(m, std::span(xs).subspan(cut - m, m));
    EXPECT_EQ(second.warmup_remaining(), 0);
    second.process(std::span(xs).subspan(cut), out);
    EXPECT_EQ(out, expected);
}

TEST(FirProperties, Linearity)
{
    std::mt19937 gen(3);
    std::uniform_int_distribution<int> d(0, 255);
    std::vector<std::uint16_t> xs(1000), zs(1000), sum(1000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = static_cast<std::uint16_t>(d(gen));
        zs[i] = static_cast<std::uint16_t>(d(gen));
        sum[i] = static_cast<std::uint16_t>((xs[i] + zs[i]) % 256);
    }
    FirState a(7), b(7), c(7);
    const auto ya = a.process(xs), yb = b.process(zs), yc = c.process(sum);
    for (std::size_t i = 0; i < yc.size(); ++i) EXPECT_EQ(yc[i], static_cast<std::uint8_t>(ya[i] + yb[i]));
}

TEST(FirProperties, OutputDependsOnlyOnLastWindow)
{
    std::mt19937 gen(4);
    std::uniform_int_distribution<int> d(0, 1023);
    std::vector<std::uint16_t> xs(600);
    for (auto& x : xs) x = static_cast<std::uint16_t>(d(gen));
    const int m = 15;
    const auto b = binomial_coeffs(m);
    FirState f(m);
    const auto out = f.process(xs);
    ASSERT_EQ(out.size(), xs.size() - m);
    for (std::size_t n = m; n < xs.size(); ++n) {
        unsigned acc = 0;
        for (int i = 0; i <= m; ++i) acc += b[i] * (xs[n - i] & 0xff);
        EXPECT_EQ(out[n - m], static_cast<std::uint8_t>(acc));
    }
}

TEST(FirProperties, HighBitsIgnored)
{
    FirState a(7), b(7);
    std::vector<std::uint16_t> xs{5, 300, 700, 1023, 12, 900, 256, 511, 4, 1000};
    std::vector<std::uint16_t> lo;
    for (auto x : xs) lo.push_back(x & 0xff);
    EXPECT_EQ(a.process(xs), b.process(lo));
}

TEST(FirUniformity, ArcsineSourceDefaultOrder)
{
    const auto cfg = load_trial_config(QRNG_DEFAULT_CONFIG);
    const auto frame = generate_frame(ideal_arcsine_config(1), 1'000'000 + cfg.fir_order, 0);
    FirState f(cfg.fir_order);
    Histogram h(256);
    h.update(f.process(frame.foreground));
    EXPECT_EQ(h.total(), 1'000'000u);
    EXPECT_GT(uniform_chi_square_p(h), 0.001);
}

TEST(FirCalibration, OrderOneFails)
{
    const auto frame = generate_frame(ideal_arcsine_config(1), 10'000'000, 0);
    const int cands[] = {1};
    try {
        calibrate_fir_order(frame.foreground, cands);
        FAIL() << "expected CalibrationError";
    } catch (const CalibrationError& e) {
        EXPECT_NE(std::string(e.what()).find("M=1"), std::string::npos) << e.what();
    }
}

TEST(FirCalibration, DefaultCandidatesPickPinnedOrder)
{
    const auto cfg = load_trial_config(QRNG_DEFAULT_CONFIG);
    const auto frame = generate_frame(ideal_arcsine_config(1), 10'000'000, 0);
    const auto r = calibrate_fir_order(frame.foreground, kDefaultFirCandidates);
    EXPECT_EQ(r.chosen_order, cfg.fir_order);
    EXPECT_EQ(r.chosen_order, 7);
    ASSERT_FALSE(r.candidates.empty());
    EXPECT_TRUE(r.candidates.front().passed);
}

TEST(FirCalibration, ConstantInputFlaggedDegenerate)
{
    const std::vector<std::uint16_t> constant(10'000'000, 517);
    const int cands[] = {8};
    try {
        calibrate_fir_order(constant, cands);
        FAIL() << "expected CalibrationError";
    } catch (const CalibrationError& e) {
        EXPECT_NE(std::string(e.what()).find("degenerate"), std::string::npos) << e.what();
    }
}

TEST(FirCalibration, Preconditions)
{
    const std::vector<std::uint16_t> shortstream(1000, 1);
    EXPECT_THROW(calibrate_fir_order(shortstream, kDefaultFirCandidates), InsufficientSampleError);
    EXPECT_THROW(calibrate_fir_order(shortstream, std::span<const int>{}, 10), ConfigError);
}
