#include "mobelcov/calendar.hpp"

#include <chrono>
#include <cstdio>

#include "mobelcov/errors.hpp"

namespace mobelcov {

namespace {

std::chrono::sys_days parse_iso(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    const std::string s(text);
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
        throw ConfigError("invalid ISO date '" + s + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw ConfigError("invalid calendar date '" + s + "'");
    return std::chrono::sys_days{ymd};
}

}  // namespace

int days_between(std::string_view from, std::string_view to) {
    return static_cast<int>((parse_iso(to) - parse_iso(from)).count());
}

std::string add_days(std::string_view origin, int offset) {
    const std::chrono::year_month_day ymd{parse_iso(origin) + std::chrono::days{offset}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace mobelcov
