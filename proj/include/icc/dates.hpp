#pragma once

#include <string>
#include <vector>

namespace icc {

// ISO-8601 calendar date helpers. Panels keep dates as strings; these cover
// parsing for order checks and weekday sequences for synthetic panels.

// "YYYY-MM-DD" -> days since 1970-01-01; throws DataError on malformed input
long parse_iso_date(const std::string& s);

std::string format_iso_date(long days_since_epoch);

// count consecutive weekdays starting at the given date (Mon-Fri only)
std::vector<std::string> weekday_sequence(const std::string& start_iso, int count);

}  // namespace icc
