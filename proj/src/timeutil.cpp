#include "gnrrm/timeutil.hpp"

#include <chrono>
#include <cstdio>

namespace gnrrm {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<HourStamp> parse_iso_hour(std::string_view s) {
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
  int y, mo, d, h = 0, mi = 0, sec = 0;
  if (!read_int(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !read_int(s, 5, 2, mo) ||
      s[7] != '-' || !read_int(s, 8, 2, d))
    return std::nullopt;
  if (s.size() > 10) {
    if ((s[10] != 'T' && s[10] != ' ') || !read_int(s, 11, 2, h)) return std::nullopt;
    std::size_t pos = 13;
    if (s.size() > pos) {
      if (s[pos] != ':' || !read_int(s, pos + 1, 2, mi)) return std::nullopt;
      pos += 3;
      if (s.size() > pos) {
        if (s[pos] != ':' || !read_int(s, pos + 1, 2, sec)) return std::nullopt;
        pos += 3;
      }
    }
    if (pos != s.size()) return std::nullopt;
  }
  if (h > 23 || mi != 0 || sec != 0) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<HourStamp>(days) * 24 + h;
}

std::string format_iso_hour(HourStamp h) {
  HourStamp days = h / 24;
  HourStamp hour = h % 24;
  if (hour < 0) {
    hour += 24;
    days -= 1;
  }
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(hour));
  return buf;
}

std::optional<TimeRange> parse_time_range(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto a = parse_iso_hour(text.substr(0, slash));
  auto b = parse_iso_hour(text.substr(slash + 1));
  if (!a || !b || *b <= *a) return std::nullopt;
  return TimeRange{*a, *b};
}

std::string format_time_range(const TimeRange& r) {
  return format_iso_hour(r.start) + "/" + format_iso_hour(r.end);
}

}  // namespace gnrrm
