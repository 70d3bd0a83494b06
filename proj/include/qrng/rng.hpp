#pragma once

// Counter-based generator used for every random draw in the simulator.
//
// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3")
// maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits with no
// hidden state, so any draw can be produced independently of every other.
// The simulator keys it with the run seed and lays the counter out as
//
//   word 0..1  draw index within a block (64 bits)
//   word 2     block index, low 32 bits
//   word 3     block index bits 32..55, xor'ed with (stream id << 24)
//
// Golden files depend on this layout; do not change it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qrng {

enum class Stream : std::uint32_t {
    source = 0,
    fault = 1,
    telemetry = 2,
    test_data = 3,
};

class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    static constexpr Block apply(Block ctr, std::uint64_t key) noexcept
    {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Random bits for one (seed, stream, block, draw) coordinate.
constexpr Philox4x32::Block draw_bits(std::uint64_t seed, Stream stream,
                                      std::uint64_t block_index,
                                      std::uint64_t draw_index) noexcept
{
    const Philox4x32::Block ctr = {
        static_cast<std::uint32_t>(draw_index),
        static_cast<std::uint32_t>(draw_index >> 32),
        static_cast<std::uint32_t>(block_index),
        static_cast<std::uint32_t>((block_index >> 32) & 0x00FFFFFFu) ^
            (static_cast<std::uint32_t>(stream) << 24),
    };
    return Philox4x32::apply(ctr, seed);
}

// 53-bit uniform in [0, 1) from two words.
constexpr double to_unit53(std::uint32_t hi, std::uint32_t lo) noexcept
{
    const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

// Uniform in the open interval (0, 1) from one word.
constexpr double to_open_unit32(std::uint32_t w) noexcept
{
    return (static_cast<double>(w) + 0.5) * 0x1.0p-32;
}

// Two independent standard normals (Box-Muller) from two words.
inline std::array<double, 2> box_muller(std::uint32_t a, std::uint32_t b) noexcept
{
    const double r = std::sqrt(-2.0 * std::log(to_open_unit32(a)));
    const double theta = 2.0 * std::numbers::pi * to_open_unit32(b);
    return {r * std::cos(theta), r * std::sin(theta)};
}

// Sequential view over one (seed, stream, block) lane; handy for tests and
// for consumers that need an arbitrary number of draws.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, Stream stream, std::uint64_t block_index = 0) noexcept
        : seed_(seed), stream_(stream), block_(block_index)
    {
    }

    Philox4x32::Block next_block() noexcept
    {
        return draw_bits(seed_, stream_, block_, counter_++);
    }

    double uniform() noexcept
    {
        const auto b = next_block();
        return to_unit53(b[0], b[1]);
    }

    double normal() noexcept
    {
        const auto b = next_block();
        return box_muller(b[0], b[1])[0];
    }

    std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t seed_;
    Stream stream_;
    std::uint64_t block_;
    std::uint64_t counter_ = 0;
};

}  // namespace qrng
