#pragma once

#include <cstdint>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace comfort {

// UTC instant with second precision.
struct Instant {
    std::int64_t sec = 0;

    auto operator<=>(const Instant&) const = default;

    Instant operator+(std::int64_t s) const { return Instant{sec + s}; }
    Instant operator-(std::int64_t s) const { return Instant{sec - s}; }
    std::int64_t operator-(const Instant& o) const { return sec - o.sec; }
};

struct CivilDate {
    int year = 1970;
    int month = 1;
    int day = 1;
};

struct CivilTime {
    CivilDate date;
    int hour = 0;
    int minute = 0;
    int second = 0;
};

// Fixed-offset timezone resolved from an IANA-style name. The table covers
// zones without daylight saving (the study site, Singapore, has none) plus
// explicit "UTC+HH:MM" style offsets; see parse_timezone().
struct Timezone {
    std::string name = "Asia/Singapore";
    std::int32_t offset_sec = 8 * 3600;
};

// Throws ConfigError for names outside the supported table/format.
Timezone parse_timezone(const std::string& name);

// Parses RFC 3339 "YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)". Fractional seconds
// are truncated; offsets are normalized to UTC. Returns nullopt if malformed.
std::optional<Instant> parse_rfc3339(std::string_view text);

// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Instant t);

// Proleptic Gregorian calendar <-> days since 1970-01-01.
std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);
bool valid_civil_date(int year, int month, int day);

CivilTime civil_from_instant(Instant t, const Timezone& tz);
Instant instant_from_civil(const CivilTime& ct, const Timezone& tz);

// Day of week with Monday = 0 ... Sunday = 6, in the given timezone.
int weekday_monday0(Instant t, const Timezone& tz);

// Fractional local hour of day in [0, 24).
double local_hour(Instant t, const Timezone& tz);

// Seconds since local midnight, in [0, 86400).
std::int64_t local_seconds_of_day(Instant t, const Timezone& tz);

}  // namespace comfort
