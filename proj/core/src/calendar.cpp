#include "restadv/calendar.hpp"

#include <cstdio>
#include <stdexcept>

namespace restadv {

namespace {

bool all_digits(std::string_view s) {
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return !s.empty();
}

}  // namespace

Date parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        !all_digits(text.substr(0, 4)) || !all_digits(text.substr(5, 2)) ||
        !all_digits(text.substr(8, 2))) {
        throw std::invalid_argument("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    const int y = (text[0] - '0') * 1000 + (text[1] - '0') * 100 + (text[2] - '0') * 10 + (text[3] - '0');
    const unsigned m = static_cast<unsigned>((text[5] - '0') * 10 + (text[6] - '0'));
    const unsigned d = static_cast<unsigned>((text[8] - '0') * 10 + (text[9] - '0'));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date '" + std::string(text) + "'");
    }
    return Date{ymd};
}

std::string to_iso_string(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date next_sunday(Date d) {
    const std::chrono::weekday wd{d};
    const auto shift = (std::chrono::Sunday - wd).count();
    return d + std::chrono::days{shift};
}

}  // namespace restadv
