#pragma once

// Built-in known-answer checks run by `qrng selftest`.

#include <string>
#include <vector>

namespace qrng {

struct SelftestCase {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<SelftestCase> run_selftest();

}  // namespace qrng
