#pragma once

#include <string>
#include <string_view>

namespace mobelcov {

/// Whole days between two ISO-8601 dates (YYYY-MM-DD); negative when `to` precedes `from`.
int days_between(std::string_view from, std::string_view to);

/// ISO-8601 date `offset` days after `origin`.
std::string add_days(std::string_view origin, int offset);

}  // namespace mobelcov
