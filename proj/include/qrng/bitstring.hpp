#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qrng {

// Packed bit sequence. Bit 0 is the most significant bit of the first word,
// so byte streams unpack most-significant-bit first.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t length) : words_((length + 63) / 64, 0), length_(length) {}

    static BitString from_bytes(std::span<const std::uint8_t> bytes);
    // Characters '0'/'1'; anything else is ignored.
    static BitString from_text(std::string_view bits);

    std::size_t size() const noexcept { return length_; }
    bool empty() const noexcept { return length_ == 0; }

    int operator[](std::size_t i) const noexcept
    {
        return static_cast<int>((words_[i >> 6] >> (63 - (i & 63))) & 1u);
    }
    void set(std::size_t i, bool v) noexcept
    {
        const std::uint64_t mask = std::uint64_t{1} << (63 - (i & 63));
        if (v) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    // `count` (<= 64) bits starting at `pos`, first bit most significant.
    std::uint64_t bits(std::size_t pos, unsigned count) const noexcept;

    std::size_t count_ones() const noexcept { return count_ones(0, length_); }
    std::size_t count_ones(std::size_t pos, std::size_t count) const noexcept;

    BitString slice(std::size_t pos, std::size_t count) const;

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    bool operator==(const BitString&) const = default;

private:
    std::vector<std::uint64_t> words_;  // unused tail bits are zero
    std::size_t length_ = 0;
};

}  // namespace qrng
