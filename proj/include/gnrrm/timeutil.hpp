#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gnrrm {

// Whole hours since 1970-01-01T00:00:00 (UTC, no leap seconds).
using HourStamp = std::int64_t;

// Accepts `YYYY-MM-DDTHH[:MM[:SS]]` with an optional trailing `Z`, or a date
// alone (midnight). Minutes and seconds must be zero. Returns nullopt on
// anything else.
std::optional<HourStamp> parse_iso_hour(std::string_view text);

// Formats as `YYYY-MM-DDTHH:00:00`.
std::string format_iso_hour(HourStamp h);

// Half-open interval [start, end) on the hour axis.
struct TimeRange {
  HourStamp start = 0;
  HourStamp end = 0;

  bool contains(HourStamp h) const { return h >= start && h < end; }
  bool overlaps(const TimeRange& o) const { return start < o.end && o.start < end; }
};

// Parses `START/END`.
std::optional<TimeRange> parse_time_range(std::string_view text);
std::string format_time_range(const TimeRange& r);

}  // namespace gnrrm
