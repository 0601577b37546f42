#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace optpred {

using Date = std::chrono::year_month_day;

enum class DateFormat {
    DayMonYear,  // 26-SEP-2019 (NSE archive style, month case-insensitive)
    Iso,         // 2019-09-26
};

/// Parses a calendar date; throws std::invalid_argument on malformed input.
Date parse_date(std::string_view text, DateFormat format);

/// Tries DayMonYear first, then ISO.
Date parse_date_any(std::string_view text);

std::string format_iso(Date d);

inline std::chrono::sys_days to_days(Date d) { return std::chrono::sys_days{d}; }

/// Calendar-day difference b - a.
inline int days_between(Date a, Date b) {
    return static_cast<int>((to_days(b) - to_days(a)).count());
}

inline Date add_days(Date d, int n) {
    return Date{to_days(d) + std::chrono::days{n}};
}

}  // namespace optpred
