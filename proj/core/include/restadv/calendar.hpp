#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace restadv {

using Date = std::chrono::sys_days;

// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws
// std::invalid_argument on malformed input or an invalid calendar day.
Date parse_iso_date(std::string_view text);

std::string to_iso_string(Date d);

// Whole days from `from` to `to` (positive when `to` is later).
inline int days_between(Date from, Date to) {
    return static_cast<int>((to - from).count());
}

// The first Sunday on or after the given date.
Date next_sunday(Date d);

}  // namespace restadv
