#pragma once

// The fifteen-test binary randomness battery: per-substring p-values,
// passing ratios and the second-order uniformity check on the p-values.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrng/bitstring.hpp"

namespace qrng::sp800_22 {

enum class TestId {
    frequency,
    block_frequency,
    cumulative_sums,
    runs,
    longest_run,
    rank,
    dft,
    non_overlapping_template,
    overlapping_template,
    universal,
    approximate_entropy,
    random_excursions,
    random_excursions_variant,
    serial,
    linear_complexity,
};

inline constexpr std::array<TestId, 15> kAllTests = {
    TestId::frequency,
    TestId::block_frequency,
    TestId::cumulative_sums,
    TestId::runs,
    TestId::longest_run,
    TestId::rank,
    TestId::dft,
    TestId::non_overlapping_template,
    TestId::overlapping_template,
    TestId::universal,
    TestId::approximate_entropy,
    TestId::random_excursions,
    TestId::random_excursions_variant,
    TestId::serial,
    TestId::linear_complexity,
};

std::string test_name(TestId id);
std::optional<TestId> test_from_name(const std::string& name);

struct BatteryParams {
    std::size_t substring_len = 1'000'000;
    std::size_t num_substrings = 1000;
    int block_frequency_m = 128;
    int template_m = 9;
    int non_overlapping_blocks = 8;
    int overlapping_m = 9;
    int overlapping_block = 1032;
    int serial_m = 16;
    int approximate_entropy_m = 10;
    int linear_complexity_m = 500;
    double alpha = 0.01;
    double uniformity_floor = 1e-4;
    unsigned workers = 1;

    static BatteryParams paper_scale();
    // 100 substrings of 1e5 bits; serial block length lowered to 13, the
    // largest valid for 1e5-bit substrings.
    static BatteryParams desk_scale();

    void validate() const;
};

nlohmann::json to_json(const BatteryParams& p);

enum class Status { ok, too_short, not_applicable };

std::string to_string(Status s);

struct TestOutcome {
    Status status = Status::ok;
    std::vector<double> p_values;  // one per variant when status == ok
    std::string note;
};

// Number of p-values a test contributes per substring.
std::size_t variant_count(TestId id, const BatteryParams& params);
std::string variant_label(TestId id, std::size_t variant, const BatteryParams& params);

// Aperiodic (self-overlap-free) templates of length m in increasing order.
std::vector<std::uint32_t> aperiodic_templates(int m);

// Exact class probabilities for overlapping matches of the all-ones
// template of length m in a block of `block` bits: P(0), ..., P(K-1),
// P(>= K).
std::vector<double> overlapping_template_probabilities(int m, int block, int classes = 6);

// Class probabilities of the longest run of ones in a block of `block`
// bits: P(<= v_lo), P(v_lo + 1), ..., P(>= v_lo + classes - 1).
std::vector<double> longest_run_probabilities(int block, int v_lo, int classes);

// Linear complexity of a bit sequence (Berlekamp-Massey over GF(2)).
int linear_complexity(const BitString& s, std::size_t pos, std::size_t len);

// Individual tests. Each returns p-values in [0,1] or a status marker.
TestOutcome frequency(const BitString& s);
TestOutcome block_frequency(const BitString& s, int block_len);
TestOutcome cumulative_sums(const BitString& s);  // forward, backward
TestOutcome runs(const BitString& s);
TestOutcome longest_run(const BitString& s);
TestOutcome rank(const BitString& s);
TestOutcome dft(const BitString& s);
TestOutcome non_overlapping_template(const BitString& s, int m, int blocks = 8);
TestOutcome overlapping_template(const BitString& s, int m, int block_len);
TestOutcome universal(const BitString& s);
TestOutcome approximate_entropy(const BitString& s, int m);
TestOutcome random_excursions(const BitString& s);
TestOutcome random_excursions_variant(const BitString& s);
TestOutcome serial(const BitString& s, int m);  // del psi^2, del^2 psi^2
TestOutcome linear_complexity_test(const BitString& s, int block_len);

TestOutcome run_test(TestId id, const BitString& substring, const BatteryParams& params);

// Contiguous, non-overlapping, in order; trailing bits dropped.
std::vector<BitString> split_substrings(const BitString& s, const BatteryParams& params);

struct PassingRatio {
    double ratio = 0.0;
    double threshold = 0.0;
    std::size_t count = 0;
    bool passed = false;
};

double ratio_threshold(std::size_t samples, double alpha);
// Throws InsufficientSampleError below 100 p-values.
PassingRatio passing_ratio(std::span<const double> p_values, double alpha);

struct Uniformity {
    double chi_square = 0.0;
    double p_value = 1.0;
    bool passed = true;
    std::array<std::size_t, 10> bins{};
};

// Ten-bin chi-square on the p-values. Throws InsufficientSampleError below
// 100 p-values.
Uniformity uniformity_gof(std::span<const double> p_values, double floor = 1e-4);

struct FamilyResult {
    TestId test = TestId::frequency;
    std::size_t variant = 0;
    std::string label;
    std::vector<double> p_values;  // applicable substrings, substring order
    std::size_t skipped = 0;
    std::optional<PassingRatio> ratio;
    std::optional<Uniformity> uniformity;
};

struct RunResult {
    BatteryParams params;
    std::vector<FamilyResult> families;

    std::size_t p_value_count() const noexcept { return families.size(); }
};

// Runs all fifteen tests on every substring. Substrings are processed by
// `params.workers` threads; results do not depend on the worker count.
RunResult run_battery(const BitString& s, const BatteryParams& params);

nlohmann::json to_json(const RunResult& r);

}  // namespace qrng::sp800_22
