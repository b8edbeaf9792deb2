#include "hubflow/time.hpp"

#include <charconv>
#include <cstdio>

#include "hubflow/error.hpp"

namespace hubflow {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t width,
              int& out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] =
      std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return ec == std::errc{};
}

std::optional<Date> date_at(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (!read_int(text, 0, 4, y) || text.size() < 10 || text[4] != '-' ||
      !read_int(text, 5, 2, m) || text[7] != '-' || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

}  // namespace

std::optional<Date> try_parse_date(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  return date_at(text);
}

Date parse_date(std::string_view text) {
  auto d = try_parse_date(text);
  if (!d) throw FormatError("bad date '" + std::string(text) + "'");
  return *d;
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<EpochSeconds> parse_iso8601(std::string_view text) {
  auto day = date_at(text);
  if (!day || text.size() < 20 || (text[10] != 'T' && text[10] != ' ')) {
    return std::nullopt;
  }
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(text, 11, 2, hh) || text[13] != ':' ||
      !read_int(text, 14, 2, mm) || text[16] != ':' ||
      !read_int(text, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      ++pos;
      ++digits;
    }
    if (digits == 0) return std::nullopt;
  }
  if (pos >= text.size()) return std::nullopt;

  int offset_minutes = 0;
  std::string_view zone = text.substr(pos);
  if (zone == "Z") {
    offset_minutes = 0;
  } else if (zone[0] == '+' || zone[0] == '-') {
    int oh = 0, om = 0;
    if (zone.size() == 6 && zone[3] == ':') {
      if (!read_int(zone, 1, 2, oh) || !read_int(zone, 4, 2, om)) {
        return std::nullopt;
      }
    } else if (zone.size() == 5) {
      if (!read_int(zone, 1, 2, oh) || !read_int(zone, 3, 2, om)) {
        return std::nullopt;
      }
    } else {
      return std::nullopt;
    }
    if (oh > 23 || om > 59) return std::nullopt;
    offset_minutes = (zone[0] == '-' ? -1 : 1) * (oh * 60 + om);
  } else {
    return std::nullopt;
  }

  EpochSeconds t = to_epoch(*day) + hh * 3600 + mm * 60 + ss;
  return t - static_cast<EpochSeconds>(offset_minutes) * 60;
}

std::string format_iso8601(EpochSeconds t) {
  auto tp = std::chrono::sys_seconds{std::chrono::seconds{t}};
  auto day = std::chrono::floor<std::chrono::days>(tp);
  std::chrono::hh_mm_ss hms{tp - day};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ",
                format_date(day).c_str(), static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

EpochSeconds to_epoch(Date d) {
  return std::chrono::duration_cast<std::chrono::seconds>(d.time_since_epoch())
      .count();
}

Date local_date(EpochSeconds t, int offset_minutes) {
  auto shifted = std::chrono::sys_seconds{
      std::chrono::seconds{t + static_cast<EpochSeconds>(offset_minutes) * 60}};
  return std::chrono::floor<std::chrono::days>(shifted);
}

std::vector<Date> date_range(Date from, Date to) {
  std::vector<Date> out;
  for (Date d = from; d <= to; d += std::chrono::days{1}) out.push_back(d);
  return out;
}

}  // namespace hubflow
