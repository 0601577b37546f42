#include <doctest.h>

#include <fstream>

#include "optpred/csv.hpp"
#include "optpred/dates.hpp"
#include "test_env.hpp"

using namespace optpred;

TEST_SUITE("csv_dates") {

TEST_CASE("archive date format parses case-insensitively") {
    const Date d = parse_date("03-JAN-2019", DateFormat::DayMonYear);
    CHECK(static_cast<int>(d.year()) == 2019);
    CHECK(static_cast<unsigned>(d.month()) == 1);
    CHECK(static_cast<unsigned>(d.day()) == 3);
    CHECK(parse_date("26-Sep-2019", DateFormat::DayMonYear) ==
          parse_date("2019-09-26", DateFormat::Iso));
    CHECK(format_iso(d) == "2019-01-03");
}

TEST_CASE("bad dates throw") {
    CHECK_THROWS_AS(parse_date("2019-02-30", DateFormat::Iso), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("31-XXX-2019", DateFormat::DayMonYear), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("garbage", DateFormat::Iso), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("", DateFormat::Iso), std::invalid_argument);
}

TEST_CASE("date arithmetic") {
    const Date d = parse_date("2019-08-31", DateFormat::Iso);
    CHECK(days_between(d, parse_date("2019-09-15", DateFormat::Iso)) == 15);
    CHECK(add_days(d, 1) == parse_date("2019-09-01", DateFormat::Iso));
    CHECK(days_between(add_days(d, 45), d) == -45);
}

TEST_CASE("csv parser handles quotes, embedded commas, and blank lines") {
    const auto records = parse_csv_text(
        "a,b,c\n"
        "\"1,234.5\",\"say \"\"hi\"\"\",plain\r\n"
        "\n"
        "x,,z\n");
    REQUIRE(records.size() == 3);
    CHECK(records[1][0] == "1,234.5");
    CHECK(records[1][1] == "say \"hi\"");
    CHECK(records[1][2] == "plain");
    CHECK(records[2][1] == "");
}

TEST_CASE("csv writer escapes and the reader round trips") {
    TempDir tmp("csvrt");
    const auto file = tmp.path / "t.csv";
    {
        CsvWriter out(file);
        out.row({"plain", "with,comma", "with\"quote", "multi\nline"});
    }
    const auto back = read_csv(file);
    REQUIRE(back.size() == 1);
    CHECK(back[0][1] == "with,comma");
    CHECK(back[0][2] == "with\"quote");
    CHECK(back[0][3] == "multi\nline");
}

TEST_CASE("numeric cells: sentinels, separators, junk") {
    CHECK(parse_numeric_cell("118.25") == 118.25);
    CHECK(parse_numeric_cell(" 1,234.55 ") == 1234.55);
    CHECK_FALSE(parse_numeric_cell("-").has_value());
    CHECK_FALSE(parse_numeric_cell("").has_value());
    CHECK_FALSE(parse_numeric_cell("12abc").has_value());
    CHECK(parse_numeric_cell("-3.5") == -3.5);
    CHECK(parse_numeric_cell("0") == 0.0);
}

TEST_CASE("fmt_double is shortest round-trip") {
    for (const double v : {0.1, 1.0 / 3.0, 118.25, 1e-17, 123456789.123456, -0.0049975}) {
        CHECK(std::stod(fmt_double(v)) == v);
    }
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(2.0) == "2");
}

}  // TEST_SUITE
