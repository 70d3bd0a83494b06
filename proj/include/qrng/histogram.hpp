#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qrng {

// Occurrence counts over a fixed number of bins (1024 for ADC codes, 256 for
// filtered bytes).
class Histogram {
public:
    explicit Histogram(std::size_t bins = 1024) : bins_(bins, 0) {}

    // Throws InputError if any code is >= size(); the histogram is left
    // unchanged in that case.
    void update(std::span<const std::uint16_t> codes);
    void update(std::span<const std::uint8_t> bytes);
    void add(std::size_t bin, std::uint64_t count = 1);

    // Throws InputError on a bin-count mismatch.
    void merge(const Histogram& other);

    std::size_t size() const noexcept { return bins_.size(); }
    std::uint64_t total() const noexcept { return total_; }
    const std::vector<std::uint64_t>& bins() const noexcept { return bins_; }
    std::uint64_t operator[](std::size_t i) const { return bins_[i]; }

    double mean() const;

    bool operator==(const Histogram&) const = default;

private:
    std::vector<std::uint64_t> bins_;
    std::uint64_t total_ = 0;
};

Histogram merged(Histogram a, const Histogram& b);

}  // namespace qrng
