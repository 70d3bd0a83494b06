#include "qrng/histogram.hpp"

#include <algorithm>
#include <string>

#include "qrng/errors.hpp"

namespace qrng {

void Histogram::update(std::span<const std::uint16_t> codes)
{
    const auto limit = bins_.size();
    if (std::any_of(codes.begin(), codes.end(), [limit](auto c) { return c >= limit; })) {
        throw InputError("histogram code out of range [0," + std::to_string(limit - 1) + "]");
    }
    for (auto c : codes) ++bins_[c];
    total_ += codes.size();
}

void Histogram::update(std::span<const std::uint8_t> bytes)
{
    if (bins_.size() < 256) {
        const auto limit = bins_.size();
        if (std::any_of(bytes.begin(), bytes.end(), [limit](auto c) { return c >= limit; })) {
            throw InputError("histogram code out of range");
        }
    }
    for (auto c : bytes) ++bins_[c];
    total_ += bytes.size();
}

void Histogram::add(std::size_t bin, std::uint64_t count)
{
    if (bin >= bins_.size()) throw InputError("histogram bin out of range");
    bins_[bin] += count;
    total_ += count;
}

void Histogram::merge(const Histogram& other)
{
    if (other.bins_.size() != bins_.size()) throw InputError("cannot merge histograms of different sizes");
    for (std::size_t i = 0; i < bins_.size(); ++i) bins_[i] += other.bins_[i];
    total_ += other.total_;
}

double Histogram::mean() const
{
    if (total_ == 0) throw InsufficientSampleError("mean of an empty histogram");
    long double acc = 0;
    for (std::size_t i = 0; i < bins_.size(); ++i) acc += static_cast<long double>(i) * bins_[i];
    return static_cast<double>(acc / total_);
}

Histogram merged(Histogram a, const Histogram& b)
{
    a.merge(b);
    return a;
}

}  // namespace qrng
