#pragma once

#include <stdexcept>
#include <string>

namespace qrng {

// Invalid parameters in a source, filter, battery or trial configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Data handed to an operation falls outside its domain (code out of range,
// malformed ledger row, string too short).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A statistic was requested on too few observations to be meaningful.
class InsufficientSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qrng
