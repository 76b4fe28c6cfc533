#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace behavtrace {

/// Durations and gaps, in milliseconds.
using Millis = std::int64_t;

inline constexpr Millis kMsPerMinute = 60'000;
inline constexpr Millis kMsPerHour = 3'600'000;
inline constexpr Millis kMsPerDay = 86'400'000;

/// Milliseconds since the Unix epoch, UTC. Never negative once parsed.
struct Timestamp {
    std::int64_t epoch_ms = 0;

    friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
    friend constexpr Timestamp operator+(Timestamp t, Millis d) { return {t.epoch_ms + d}; }
    friend constexpr Millis operator-(Timestamp a, Timestamp b) { return a.epoch_ms - b.epoch_ms; }
};

/// Signed offset of user-local time from UTC, in minutes.
struct TzOffset {
    int minutes = 0;

    friend constexpr bool operator==(const TzOffset&, const TzOffset&) = default;
};

/// Parses an RFC 3339 date-time ("2024-03-01T09:15:00.250+08:00", "...Z").
/// Fractional seconds beyond milliseconds are truncated. Returns nullopt on
/// any syntax or range error.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Local wall-clock milliseconds since the epoch (UTC shifted by the offset).
constexpr std::int64_t local_ms(Timestamp ts, TzOffset tz) {
    return ts.epoch_ms + static_cast<std::int64_t>(tz.minutes) * kMsPerMinute;
}

/// Floor division that rounds toward negative infinity.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

/// Local calendar day, counted in days since 1970-01-01.
constexpr std::int64_t local_day(Timestamp ts, TzOffset tz) {
    return floor_div(local_ms(ts, tz), kMsPerDay);
}

/// Local minute of the day in [0, 1440).
constexpr int local_minute_of_day(Timestamp ts, TzOffset tz) {
    const auto ms = local_ms(ts, tz) - local_day(ts, tz) * kMsPerDay;
    return static_cast<int>(ms / kMsPerMinute);
}

/// Local hour of the day in [0, 24).
constexpr int local_hour(Timestamp ts, TzOffset tz) { return local_minute_of_day(ts, tz) / 60; }

/// ISO weekday of a day count: 1 = Monday ... 7 = Sunday.
unsigned iso_weekday(std::int64_t day);

/// Day count of the first day of the calendar month containing `day`.
std::int64_t month_start_day(std::int64_t day);

/// Day count of the first day of the month after the one containing `day`.
std::int64_t next_month_start_day(std::int64_t day);

/// "YYYY-MM-DD" for a day count.
std::string format_date(std::int64_t day);

/// RFC 3339 rendering of a UTC instant in the given local offset,
/// e.g. "2024-01-01T09:00:00+08:00". Milliseconds appear only when non-zero.
std::string format_rfc3339(Timestamp ts, TzOffset tz);

}  // namespace behavtrace
