#pragma once

// Entropy estimation from code histograms and the analytic source model the
// foreground histogram is checked against.

#include <cstdint>
#include <span>
#include <vector>

#include "qrng/histogram.hpp"
#include "qrng/source.hpp"

namespace qrng {

struct EntropyReport {
    double shannon_bits = 0.0;
    double min_entropy_bits = 0.0;
    double per_bit_shannon = 0.0;  // shannon_bits / 10
    double per_bit_min = 0.0;      // min_entropy_bits / 10
};

// -sum p log2 p over non-empty bins. Throws InsufficientSampleError if empty.
double shannon_entropy(const Histogram& h);
// -log2 max p.
double min_entropy(const Histogram& h);
EntropyReport entropy_report(const Histogram& h);

double shannon_entropy(std::span<const double> pmf);
double min_entropy(std::span<const double> pmf);

// Exact 1024-bin discretized arcsine law of an ideal full-scale fringe:
// p_k = (2/pi) (asin(sqrt((k+1)/1024)) - asin(sqrt(k/1024))).
std::vector<double> ideal_arcsine_pmf();

// Distribution of foreground codes for `cfg`: the fringe mapped through
// gain and offset, convolved with Gaussian detection noise and clamped to the
// ADC range. Ideal configurations return the exact closed form above.
// Faults are ignored.
std::vector<double> arcsine_pmf(const SourceConfig& cfg);

bool is_ideal(const SourceConfig& cfg) noexcept;

// Pearson chi-square of a code histogram against a model pmf, pooling
// adjacent bins to an expectation of at least 5. Requires
// total >= 10 * bins.
double foreground_gof(const Histogram& h, std::span<const double> pmf);

struct CalibrationTarget {
    double shannon_bits = 9.27;
    double min_entropy_bits = 8.56;
    double shannon_tol = 0.02;
    double min_entropy_tol = 0.04;
};

struct SourceCalibration {
    double gain = 0.0;
    double offset = 0.0;
    double noise_sigma = 0.0;
    double shannon_bits = 0.0;
    double min_entropy_bits = 0.0;
    int evaluations = 0;
};

// Grid search with successive refinement over (gain, offset, noise_sigma)
// at unit visibility, minimizing the tolerance-scaled distance to the
// target entropies of the modeled pmf. Throws CalibrationError when the
// best point misses either tolerance.
SourceCalibration calibrate_source(const CalibrationTarget& target = {});

}  // namespace qrng
