#include "qrng/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace qrng {

RawFrame generate_range(const SourceConfig& cfg, std::uint64_t first, std::size_t n, unsigned workers)
{
    RawFrame out;
    out.foreground.resize(n);
    out.background.resize(n);
    if (n == 0) return out;

    const std::uint64_t c0 = first / kChunkSamples;
    const std::uint64_t c1 = (first + n - 1) / kChunkSamples;
    const std::size_t chunks = static_cast<std::size_t>(c1 - c0 + 1);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < chunks; k = next++) {
            const std::uint64_t c = c0 + k;
            const auto frame = generate_frame(cfg, kChunkSamples, c);
            const std::uint64_t chunk_first = c * kChunkSamples;
            const std::uint64_t lo = std::max(first, chunk_first);
            const std::uint64_t hi = std::min(first + n, chunk_first + kChunkSamples);
            const auto src = static_cast<std::ptrdiff_t>(lo - chunk_first);
            const auto len = static_cast<std::ptrdiff_t>(hi - lo);
            const auto dst = static_cast<std::ptrdiff_t>(lo - first);
            std::copy_n(frame.foreground.begin() + src, len, out.foreground.begin() + dst);
            std::copy_n(frame.background.begin() + src, len, out.background.begin() + dst);
        }
    };

    const unsigned w = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::min<std::size_t>(chunks, 256)));
    if (w == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
    }
    return out;
}

Pipeline::Pipeline(SourceConfig cfg, int fir_order, std::uint64_t first_sample, unsigned workers)
    : cfg_(std::move(cfg)), fir_(fir_order), next_sample_(first_sample), workers_(std::max(1u, workers))
{
    cfg_.validate();
}

PipelineOutput Pipeline::pull(std::size_t num_bytes)
{
    PipelineOutput out;
    out.first_sample = next_sample_;
    const std::size_t n = num_bytes + static_cast<std::size_t>(fir_.warmup_remaining());
    const auto frame = generate_range(cfg_, next_sample_, n, workers_);
    next_sample_ += n;
    out.samples = n;
    out.bytes.reserve(num_bytes);
    fir_.process(frame.foreground, out.bytes);
    out.foreground.update(std::span<const std::uint16_t>(frame.foreground));
    out.background.update(std::span<const std::uint16_t>(frame.background));
    out.postfir.update(std::span<const std::uint8_t>(out.bytes));
    return out;
}

}  // namespace qrng
