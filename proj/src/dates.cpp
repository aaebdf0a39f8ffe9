#include "icc/dates.hpp"

#include <chrono>
#include <cstdio>

#include "icc/errors.hpp"

namespace icc {

namespace chr = std::chrono;

long parse_iso_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char sep1 = 0, sep2 = 0, trail = 0;
  const int got = std::sscanf(s.c_str(), "%d%c%d%c%d%c", &y, &sep1, &m, &sep2, &d, &trail);
  if (got != 5 || sep1 != '-' || sep2 != '-') {
    throw DataError("malformed date (expected YYYY-MM-DD): '" + s + "'");
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date: '" + s + "'");
  }
  return chr::sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(long days_since_epoch) {
  const chr::sys_days sd{chr::days{days_since_epoch}};
  const chr::year_month_day ymd{sd};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::vector<std::string> weekday_sequence(const std::string& start_iso, int count) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  chr::sys_days sd{chr::days{parse_iso_date(start_iso)}};
  while (static_cast<int>(out.size()) < count) {
    const chr::weekday wd{sd};
    if (wd != chr::Saturday && wd != chr::Sunday) {
      out.push_back(format_iso_date(sd.time_since_epoch().count()));
    }
    sd += chr::days{1};
  }
  return out;
}

}  // namespace icc
