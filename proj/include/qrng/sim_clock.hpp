#pragma once

#include <cstdint>
#include <string>

namespace qrng {

// Simulated wall clock: trial outputs carry timestamps derived from the
// simulated day index, never from the host clock.
inline constexpr std::int64_t kSimEpochUnix = 1577836800;  // 2020-01-01T00:00:00Z

// "YYYY-MM-DDThh:mm:ssZ" for seconds since the Unix epoch.
std::string iso8601_utc(std::int64_t unix_seconds);

// Seconds since the simulated epoch for a fractional simulated day.
std::string sim_timestamp(double day);

// Inverse of iso8601_utc; throws InputError on malformed text.
std::int64_t parse_iso8601_utc(const std::string& text);

}  // namespace qrng
