#pragma once

// Binomial FIR unbiasing filter:
//
//   y(n) = sum_{i=0}^{M} C(M,i) * x(n-i)  mod 256
//
// Only x mod 256 influences y, so the filter keeps the low byte of each raw
// sample and works in 8-bit wraparound arithmetic throughout. The first M
// inputs only fill the history and produce no output.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qrng {

inline constexpr int kMaxFirOrder = 4096;

// [C(m,0) mod 256, ..., C(m,m) mod 256] via the Pascal recurrence.
std::vector<std::uint8_t> binomial_coeffs(int m);

class FirState {
public:
    explicit FirState(int order);

    // Seeds the history with the previous block's trailing raw inputs so a
    // block can be filtered independently of the ones before it. `tail` holds
    // up to M values, oldest first; a full tail skips the warm-up.
    FirState(int order, std::span<const std::uint16_t> tail);

    int order() const noexcept { return order_; }
    const std::vector<std::uint8_t>& coeffs() const noexcept { return coeffs_; }
    int warmup_remaining() const noexcept { return warmup_; }

    // nullopt while warming up. Throws InputError for x outside [0,1023].
    std::optional<std::uint8_t> next(std::uint16_t x);

    // Folds next() over xs, appending produced bytes to `out`.
    void process(std::span<const std::uint16_t> xs, std::vector<std::uint8_t>& out);
    std::vector<std::uint8_t> process(std::span<const std::uint16_t> xs);

    // Last min(M, seen) inputs (low bytes), oldest first.
    std::vector<std::uint8_t> history() const;

    bool operator==(const FirState&) const = default;

private:
    std::uint8_t push_and_filter(std::uint8_t x) noexcept;

    int order_;
    std::vector<std::uint8_t> coeffs_;
    // Ring of the last M+1 inputs, sized to a power of two.
    std::vector<std::uint8_t> ring_;
    std::size_t mask_;
    std::size_t head_ = 0;  // index of the next write
    int warmup_;
};

struct FirCalibrationCandidate {
    int order = 0;
    double uniformity_p = 0.0;
    double serial_r = 0.0;
    double serial_bound = 0.0;
    bool degenerate = false;
    bool passed = false;
};

struct FirCalibrationResult {
    int chosen_order = 0;
    std::vector<FirCalibrationCandidate> candidates;
};

inline constexpr int kDefaultFirCandidates[] = {7, 15, 31, 63, 127};

// Smallest candidate order whose output passes byte uniformity (p > 0.01)
// and lag-1 byte correlation |r| < 4/sqrt(n). Throws CalibrationError with
// the per-candidate diagnostics when none passes.
FirCalibrationResult calibrate_fir_order(std::span<const std::uint16_t> source,
                                         std::span<const int> candidates,
                                         std::size_t min_stream = 10'000'000);

}  // namespace qrng
