#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "comfort/csv.hpp"
#include "comfort/errors.hpp"
#include "comfort/geometry.hpp"
#include "comfort/rng.hpp"
#include "comfort/sha256.hpp"
#include "comfort/time_util.hpp"

using namespace comfort;

TEST_CASE("rfc3339 parsing") {
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z")->sec == 0);
    CHECK(parse_rfc3339("2020-03-02T09:15:30Z")->sec == 1583140530);
    // Offsets normalize to UTC.
    CHECK(parse_rfc3339("2020-03-02T17:15:30+08:00")->sec ==
          parse_rfc3339("2020-03-02T09:15:30Z")->sec);
    CHECK(parse_rfc3339("2020-03-02T04:15:30-05:00")->sec ==
          parse_rfc3339("2020-03-02T09:15:30Z")->sec);
    // Fractional seconds truncate.
    CHECK(parse_rfc3339("2020-03-02T09:15:30.750Z")->sec == 1583140530);

    CHECK_FALSE(parse_rfc3339("2020-03-02 no"));
    CHECK_FALSE(parse_rfc3339("2020-13-02T09:15:30Z"));
    CHECK_FALSE(parse_rfc3339("2020-02-30T09:15:30Z"));
    CHECK_FALSE(parse_rfc3339("2020-03-02T24:15:30Z"));
    CHECK_FALSE(parse_rfc3339("2020-03-02T09:15:30"));       // no zone designator
    CHECK_FALSE(parse_rfc3339("2020-03-02T09:15:30Zfoo"));   // trailing junk
    CHECK(parse_rfc3339("2020-02-29T00:00:00Z"));            // leap day
    CHECK_FALSE(parse_rfc3339("2021-02-29T00:00:00Z"));
}

TEST_CASE("rfc3339 format round-trip") {
    for (const std::int64_t sec : {0L, 1583140530L, 4102444799L, 86399L}) {
        const std::string text = format_rfc3339(Instant{sec});
        REQUIRE(parse_rfc3339(text));
        CHECK(parse_rfc3339(text)->sec == sec);
    }
}

TEST_CASE("weekday and local time in Singapore") {
    const Timezone sgt = parse_timezone("Asia/Singapore");
    // 2020-03-02 was a Monday; 00:00 SGT is 16:00Z the previous day.
    const Instant monday_midnight = *parse_rfc3339("2020-03-01T16:00:00Z");
    CHECK(weekday_monday0(monday_midnight, sgt) == 0);
    CHECK(local_seconds_of_day(monday_midnight, sgt) == 0);
    CHECK(local_hour(monday_midnight + 6 * 3600, sgt) == doctest::Approx(6.0));
    const CivilTime ct = civil_from_instant(monday_midnight, sgt);
    CHECK(ct.date.year == 2020);
    CHECK(ct.date.month == 3);
    CHECK(ct.date.day == 2);
    CHECK(instant_from_civil(ct, sgt).sec == monday_midnight.sec);
}

TEST_CASE("timezone table and offsets") {
    CHECK(parse_timezone("Asia/Singapore").offset_sec == 8 * 3600);
    CHECK(parse_timezone("UTC").offset_sec == 0);
    CHECK(parse_timezone("UTC+8").offset_sec == 8 * 3600);
    CHECK(parse_timezone("+08:00").offset_sec == 8 * 3600);
    CHECK(parse_timezone("UTC-05:30").offset_sec == -(5 * 3600 + 30 * 60));
    CHECK_THROWS_AS(parse_timezone("America/New_York"), ConfigError);
}

TEST_CASE("csv split and escape") {
    CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(split_csv_line(R"("a,b",c)") == std::vector<std::string>{"a,b", "c"});
    CHECK(split_csv_line(R"("he said ""hi""",x)") ==
          std::vector<std::string>{"he said \"hi\"", "x"});
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("with,comma") == "\"with,comma\"");
    CHECK(split_csv_line(csv_escape("round,\"trip\"")) ==
          std::vector<std::string>{"round,\"trip\""});
}

TEST_CASE("double formatting round-trips exactly") {
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(-1e6, 1e6);
        CHECK(*parse_strict_double(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK_FALSE(parse_strict_double("1.2abc"));
    CHECK_FALSE(parse_strict_double(""));
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    // Block-boundary padding.
    CHECK(sha256_hex(std::string(64, 'a')) ==
          "ffe054fe7ae0cb6dc65c3af9b61d5209f439851db43d0ba5997337df154668eb");
}

TEST_CASE("rng bounded draws and determinism") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

    Rng rng(7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 3000; ++i) {
        const auto v = rng.below(13);
        CHECK(v < 13);
        seen.insert(v);
    }
    CHECK(seen.size() == 13);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(rng.uniform_int(3, 3) == 3);
}

TEST_CASE("polygon area and containment") {
    const std::vector<Point> square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    CHECK(polygon_area(square) == doctest::Approx(100.0));
    CHECK(point_in_polygon({5, 5}, square));
    CHECK_FALSE(point_in_polygon({15, 5}, square));
    // Boundary counts as inside.
    CHECK(point_in_polygon({0, 5}, square));
    CHECK(point_in_polygon({10, 10}, square));
    CHECK(point_in_polygon({5, 0}, square));

    const std::vector<Point> triangle{{0, 0}, {4, 0}, {0, 4}};
    CHECK(polygon_area(triangle) == doctest::Approx(8.0));
    CHECK(point_in_polygon({1, 1}, triangle));
    CHECK(point_in_polygon({2, 2}, triangle));  // on the hypotenuse
    CHECK_FALSE(point_in_polygon({3, 3}, triangle));
}

TEST_CASE("polygon simplicity") {
    const std::vector<Point> square{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    CHECK(polygon_is_simple(square));
    const std::vector<Point> bowtie{{0, 0}, {10, 10}, {10, 0}, {0, 10}};
    CHECK_FALSE(polygon_is_simple(bowtie));
    const std::vector<Point> degenerate{{0, 0}, {0, 0}, {10, 10}};
    CHECK_FALSE(polygon_is_simple(degenerate));
}
