#include "comfort/time_util.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "comfort/errors.hpp"

namespace comfort {

namespace {

bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> kDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return kDays[static_cast<std::size_t>(m - 1)];
}

}  // namespace

bool valid_civil_date(int year, int month, int day) {
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > days_in_month(year, month)) return false;
    return true;
}

// Howard Hinnant's chrono-compatible civil algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

std::optional<Instant> parse_rfc3339(std::string_view s) {
    // Minimum: YYYY-MM-DDTHH:MM:SSZ  (20 chars)
    if (s.size() < 20) return std::nullopt;
    int year, month, day, hour, minute, second;
    if (!parse_fixed_int(s, 0, 4, year)) return std::nullopt;
    if (s[4] != '-') return std::nullopt;
    if (!parse_fixed_int(s, 5, 2, month)) return std::nullopt;
    if (s[7] != '-') return std::nullopt;
    if (!parse_fixed_int(s, 8, 2, day)) return std::nullopt;
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
    if (!parse_fixed_int(s, 11, 2, hour)) return std::nullopt;
    if (s[13] != ':') return std::nullopt;
    if (!parse_fixed_int(s, 14, 2, minute)) return std::nullopt;
    if (s[16] != ':') return std::nullopt;
    if (!parse_fixed_int(s, 17, 2, second)) return std::nullopt;

    if (!valid_civil_date(year, month, day)) return std::nullopt;
    if (hour > 23 || minute > 59 || second > 59) return std::nullopt;

    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t digits = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            ++pos;
            ++digits;
        }
        if (digits == 0) return std::nullopt;  // truncate fraction, second precision
    }
    if (pos >= s.size()) return std::nullopt;

    std::int64_t offset = 0;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '+' ? 1 : -1;
        int oh, om;
        if (!parse_fixed_int(s, pos + 1, 2, oh)) return std::nullopt;
        if (pos + 3 >= s.size() || s[pos + 3] != ':') return std::nullopt;
        if (!parse_fixed_int(s, pos + 4, 2, om)) return std::nullopt;
        if (oh > 23 || om > 59) return std::nullopt;
        offset = sign * (oh * 3600 + om * 60);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const std::int64_t days = days_from_civil(year, month, day);
    const std::int64_t local = days * 86400 + hour * 3600 + minute * 60 + second;
    return Instant{local - offset};
}

std::string format_rfc3339(Instant t) {
    std::int64_t days = t.sec / 86400;
    std::int64_t rem = t.sec % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const CivilDate d = civil_from_days(days);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month, d.day,
                  static_cast<int>(rem / 3600), static_cast<int>((rem % 3600) / 60),
                  static_cast<int>(rem % 60));
    return std::string(buf);
}

Timezone parse_timezone(const std::string& name) {
    if (name == "Asia/Singapore") return Timezone{name, 8 * 3600};
    if (name == "UTC" || name == "Etc/UTC" || name == "Z") return Timezone{name, 0};

    // "UTC+8", "UTC-05:30", "+08:00", "-0330"
    std::string_view s = name;
    if (s.starts_with("UTC")) s.remove_prefix(3);
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
        const int sign = s[0] == '+' ? 1 : -1;
        s.remove_prefix(1);
        std::string digits;
        for (char c : s)
            if (c != ':') digits.push_back(c);
        int hours = 0, minutes = 0;
        bool ok = false;
        if (digits.size() == 1 || digits.size() == 2) {
            ok = std::from_chars(digits.data(), digits.data() + digits.size(), hours).ec ==
                 std::errc{};
        } else if (digits.size() == 3 || digits.size() == 4) {
            const std::size_t hl = digits.size() - 2;
            ok = std::from_chars(digits.data(), digits.data() + hl, hours).ec == std::errc{} &&
                 std::from_chars(digits.data() + hl, digits.data() + digits.size(), minutes).ec ==
                     std::errc{};
        }
        if (ok && hours <= 23 && minutes <= 59) {
            return Timezone{name, sign * (hours * 3600 + minutes * 60)};
        }
    }
    throw ConfigError("unsupported timezone '" + name +
                      "': use Asia/Singapore, UTC, or a fixed offset like UTC+8 / +08:00");
}

CivilTime civil_from_instant(Instant t, const Timezone& tz) {
    std::int64_t local = t.sec + tz.offset_sec;
    std::int64_t days = local / 86400;
    std::int64_t rem = local % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    CivilTime ct;
    ct.date = civil_from_days(days);
    ct.hour = static_cast<int>(rem / 3600);
    ct.minute = static_cast<int>((rem % 3600) / 60);
    ct.second = static_cast<int>(rem % 60);
    return ct;
}

Instant instant_from_civil(const CivilTime& ct, const Timezone& tz) {
    const std::int64_t days = days_from_civil(ct.date.year, ct.date.month, ct.date.day);
    const std::int64_t local = days * 86400 + ct.hour * 3600 + ct.minute * 60 + ct.second;
    return Instant{local - tz.offset_sec};
}

std::int64_t local_seconds_of_day(Instant t, const Timezone& tz) {
    std::int64_t local = t.sec + tz.offset_sec;
    std::int64_t rem = local % 86400;
    if (rem < 0) rem += 86400;
    return rem;
}

double local_hour(Instant t, const Timezone& tz) {
    return static_cast<double>(local_seconds_of_day(t, tz)) / 3600.0;
}

int weekday_monday0(Instant t, const Timezone& tz) {
    std::int64_t local = t.sec + tz.offset_sec;
    std::int64_t days = local / 86400;
    if (local % 86400 < 0) --days;
    // 1970-01-01 is a Thursday; Monday = 0.
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

}  // namespace comfort
