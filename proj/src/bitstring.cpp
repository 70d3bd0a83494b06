#include "qrng/bitstring.hpp"

#include <bit>

#include "qrng/errors.hpp"

namespace qrng {

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes)
{
    BitString s(bytes.size() * 8);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        s.words_[i >> 3] |= std::uint64_t{bytes[i]} << (56 - 8 * (i & 7));
    }
    return s;
}

BitString BitString::from_text(std::string_view text)
{
    std::size_t n = 0;
    for (char c : text) n += (c == '0' || c == '1');
    BitString s(n);
    std::size_t i = 0;
    for (char c : text) {
        if (c == '0' || c == '1') s.set(i++, c == '1');
    }
    return s;
}

std::uint64_t BitString::bits(std::size_t pos, unsigned count) const noexcept
{
    if (count == 0) return 0;
    const std::size_t w = pos >> 6;
    const unsigned off = static_cast<unsigned>(pos & 63);
    std::uint64_t hi = words_[w] << off;
    if (off != 0 && w + 1 < words_.size()) hi |= words_[w + 1] >> (64 - off);
    return hi >> (64 - count);
}

std::size_t BitString::count_ones(std::size_t pos, std::size_t count) const noexcept
{
    std::size_t ones = 0;
    std::size_t i = pos;
    const std::size_t end = pos + count;
    while (i < end && (i & 63) != 0) ones += static_cast<std::size_t>((*this)[i++]);
    while (i + 64 <= end) {
        ones += static_cast<std::size_t>(std::popcount(words_[i >> 6]));
        i += 64;
    }
    while (i < end) ones += static_cast<std::size_t>((*this)[i++]);
    return ones;
}

BitString BitString::slice(std::size_t pos, std::size_t count) const
{
    if (pos + count > length_) throw InputError("BitString::slice out of range");
    BitString out(count);
    std::size_t i = 0;
    for (; i + 64 <= count; i += 64) out.words_[i >> 6] = bits(pos + i, 64);
    if (i < count) {
        const auto rest = static_cast<unsigned>(count - i);
        out.words_[i >> 6] = bits(pos + i, rest) << (64 - rest);
    }
    return out;
}

}  // namespace qrng
