#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace ocsplab {

using Duration = std::chrono::milliseconds;
using Instant = std::chrono::sys_time<Duration>;

enum class Granularity { second, millisecond };

inline Duration step(Granularity g) {
  return g == Granularity::second ? Duration(1000) : Duration(1);
}

/// Truncates toward negative infinity so pre-epoch instants stay on grid.
Instant truncate(Instant t, Granularity g);

std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view s);

/// ISO-8601 UTC with millisecond precision, e.g. 2016-08-01T12:00:00.120Z.
std::string format_instant(Instant t);

/// Accepts ISO-8601 UTC (seconds or milliseconds, trailing Z) or integer
/// milliseconds since the Unix epoch.
Instant parse_instant(std::string_view s);

/// Durations are written as an integer with an optional unit suffix
/// (ms, s, m, h, d); a bare integer means seconds.
Duration parse_duration(std::string_view s);
std::string format_duration(Duration d);

}  // namespace ocsplab
