#include "optpred/dates.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace optpred {
namespace {

constexpr std::array<std::string_view, 12> kMonths = {
    "JAN", "FEB", "MAR", "APR", "MAY", "JUN",
    "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};

int parse_int(std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("bad date component: " + std::string(s));
    return value;
}

int month_from_name(std::string_view s) {
    if (s.size() != 3) throw std::invalid_argument("bad month name: " + std::string(s));
    std::string upper;
    for (char c : s) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    for (std::size_t i = 0; i < kMonths.size(); ++i)
        if (upper == kMonths[i]) return static_cast<int>(i) + 1;
    throw std::invalid_argument("bad month name: " + std::string(s));
}

Date make_date(int y, int m, int d) {
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw std::invalid_argument("invalid calendar date");
    return date;
}

}  // namespace

Date parse_date(std::string_view text, DateFormat format) {
    const auto p1 = text.find('-');
    const auto p2 = text.rfind('-');
    if (p1 == std::string_view::npos || p2 == p1)
        throw std::invalid_argument("bad date: " + std::string(text));
    const auto a = text.substr(0, p1);
    const auto b = text.substr(p1 + 1, p2 - p1 - 1);
    const auto c = text.substr(p2 + 1);
    switch (format) {
        case DateFormat::DayMonYear:
            return make_date(parse_int(c), month_from_name(b), parse_int(a));
        case DateFormat::Iso:
            return make_date(parse_int(a), parse_int(b), parse_int(c));
    }
    throw std::invalid_argument("unknown date format");
}

Date parse_date_any(std::string_view text) {
    try {
        return parse_date(text, DateFormat::DayMonYear);
    } catch (const std::invalid_argument&) {
        return parse_date(text, DateFormat::Iso);
    }
}

std::string format_iso(Date d) {
    char buf[16];
    const int y = static_cast<int>(d.year());
    const unsigned m = static_cast<unsigned>(d.month());
    const unsigned dd = static_cast<unsigned>(d.day());
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, dd);
    return buf;
}

}  // namespace optpred
