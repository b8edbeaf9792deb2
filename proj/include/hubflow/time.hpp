#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hubflow {

// Seconds since the Unix epoch, UTC.
using EpochSeconds = std::int64_t;

// A calendar day. Whether it is a UTC or a local day depends on context;
// period binning always converts with an explicit offset first.
using Date = std::chrono::sys_days;

// ISO-8601 date-time with an explicit zone ("Z", "+08:00", "+0800").
// Fractional seconds are accepted and floored. Returns nullopt on any
// syntax or range problem.
std::optional<EpochSeconds> parse_iso8601(std::string_view text);

// Always UTC with a trailing "Z".
std::string format_iso8601(EpochSeconds t);

std::optional<Date> try_parse_date(std::string_view text);
// Throws FormatError.
Date parse_date(std::string_view text);
std::string format_date(Date d);

EpochSeconds to_epoch(Date d);
// The calendar day containing t once shifted by offset_minutes.
Date local_date(EpochSeconds t, int offset_minutes);

// Inclusive on both ends; empty when to < from.
std::vector<Date> date_range(Date from, Date to);

}  // namespace hubflow
