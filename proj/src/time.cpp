#include "behavtrace/time.hpp"

#include <chrono>
#include <cstdio>

namespace behavtrace {
namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

std::chrono::sys_days to_sys_days(std::int64_t day) {
    return std::chrono::sys_days{std::chrono::days{day}};
}

}  // namespace

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
    int year = 0, month = 0, mday = 0, hour = 0, minute = 0, second = 0;
    if (!read_digits(s, 0, 4, year) || s.size() < 19 || s[4] != '-' ||
        !read_digits(s, 5, 2, month) || s[7] != '-' || !read_digits(s, 8, 2, mday))
        return std::nullopt;
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
    if (!read_digits(s, 11, 2, hour) || s[13] != ':' || !read_digits(s, 14, 2, minute) ||
        s[16] != ':' || !read_digits(s, 17, 2, second))
        return std::nullopt;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

    std::size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        int scale = 100;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            millis += (s[pos] - '0') * scale;
            scale /= 10;
            ++pos;
        }
        if (pos == start) return std::nullopt;
    }

    int offset_min = 0;
    if (pos >= s.size()) return std::nullopt;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        int oh = 0, om = 0;
        if (!read_digits(s, pos + 1, 2, oh) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
            !read_digits(s, pos + 4, 2, om) || oh > 23 || om > 59)
            return std::nullopt;
        offset_min = sign * (oh * 60 + om);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(mday)}};
    if (!ymd.ok()) return std::nullopt;
    // Leap seconds fold onto the following second.
    const std::int64_t day = sys_days{ymd}.time_since_epoch().count();
    const std::int64_t ms = day * kMsPerDay + hour * kMsPerHour + minute * kMsPerMinute +
                            second * 1000LL + millis - offset_min * kMsPerMinute;
    if (ms < 0) return std::nullopt;
    return Timestamp{ms};
}

unsigned iso_weekday(std::int64_t day) {
    return std::chrono::weekday{to_sys_days(day)}.iso_encoding();
}

std::int64_t month_start_day(std::int64_t day) {
    const std::chrono::year_month_day ymd{to_sys_days(day)};
    return std::chrono::sys_days{ymd.year() / ymd.month() / 1}.time_since_epoch().count();
}

std::int64_t next_month_start_day(std::int64_t day) {
    const std::chrono::year_month_day ymd{to_sys_days(day)};
    const auto next = std::chrono::year_month{ymd.year(), ymd.month()} + std::chrono::months{1};
    return std::chrono::sys_days{next / 1}.time_since_epoch().count();
}

std::string format_date(std::int64_t day) {
    const std::chrono::year_month_day ymd{to_sys_days(day)};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_rfc3339(Timestamp ts, TzOffset tz) {
    const std::int64_t local = local_ms(ts, tz);
    const std::int64_t day = floor_div(local, kMsPerDay);
    std::int64_t rem = local - day * kMsPerDay;
    const int hour = static_cast<int>(rem / kMsPerHour);
    rem %= kMsPerHour;
    const int minute = static_cast<int>(rem / kMsPerMinute);
    rem %= kMsPerMinute;
    const int second = static_cast<int>(rem / 1000);
    const int millis = static_cast<int>(rem % 1000);

    std::string out = format_date(day);
    char buf[48];
    if (millis != 0)
        std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d.%03d", hour, minute, second, millis);
    else
        std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d", hour, minute, second);
    out += buf;
    if (tz.minutes == 0) {
        out += 'Z';
    } else {
        const int a = tz.minutes < 0 ? -tz.minutes : tz.minutes;
        std::snprintf(buf, sizeof buf, "%c%02d:%02d", tz.minutes < 0 ? '-' : '+', a / 60, a % 60);
        out += buf;
    }
    return out;
}

}  // namespace behavtrace
