#pragma once

// Source -> FIR byte stream over a single global sample index. Samples are
// produced in fixed-size chunks whose RNG block is the chunk number, so the
// output does not depend on how many workers generate it.

#include <cstdint>
#include <vector>

#include "qrng/fir.hpp"
#include "qrng/histogram.hpp"
#include "qrng/source.hpp"

namespace qrng {

inline constexpr std::size_t kChunkSamples = 1 << 16;

struct PipelineOutput {
    std::vector<std::uint8_t> bytes;
    Histogram foreground{1024};
    Histogram background{1024};
    Histogram postfir{256};
    std::uint64_t first_sample = 0;
    std::uint64_t samples = 0;  // raw samples consumed, warm-up included
};

// Raw foreground/background samples [first, first + n) of the global stream.
RawFrame generate_range(const SourceConfig& cfg, std::uint64_t first, std::size_t n, unsigned workers = 1);

class Pipeline {
public:
    // Starts a fresh filter at global sample `first_sample`.
    Pipeline(SourceConfig cfg, int fir_order, std::uint64_t first_sample = 0, unsigned workers = 1);

    // Produces exactly `num_bytes` post-filter bytes, pulling however many
    // raw samples that takes (num_bytes + remaining warm-up).
    PipelineOutput pull(std::size_t num_bytes);

    std::uint64_t next_sample() const noexcept { return next_sample_; }
    const SourceConfig& config() const noexcept { return cfg_; }

private:
    SourceConfig cfg_;
    FirState fir_;
    std::uint64_t next_sample_;
    unsigned workers_;
};

}  // namespace qrng
