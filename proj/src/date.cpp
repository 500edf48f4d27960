#include "citevec/date.hpp"

#include <charconv>
#include <cstdio>

#include "citevec/errors.hpp"

namespace citevec {
namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

template <typename Int>
std::optional<Int> to_int(std::string_view s) {
  Int v{};
  if (s.empty()) return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::optional<Date> parse_iso(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = to_int<int>(s.substr(0, 4));
  auto m = to_int<unsigned>(s.substr(5, 2));
  auto d = to_int<unsigned>(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  return Date::from_ymd(*y, *m, *d);
}

std::optional<Date> parse_year(std::string_view s) {
  if (s.size() != 4) return std::nullopt;
  auto y = to_int<int>(s);
  if (!y) return std::nullopt;
  return Date::from_ymd(*y, 1, 1);
}

}  // namespace

std::optional<Date> Date::from_ymd(int y, unsigned m, unsigned d) {
  year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
}

std::chrono::year_month_day Date::ymd() const {
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
}

int Date::year() const { return static_cast<int>(ymd().year()); }

std::string Date::iso() const {
  auto v = ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
  return buf;
}

std::optional<DateFormat> parse_date_format(std::string_view name) {
  if (name == "auto") return DateFormat::automatic;
  if (name == "iso") return DateFormat::iso;
  if (name == "year") return DateFormat::year;
  if (name == "nber-days") return DateFormat::nber_days;
  return std::nullopt;
}

std::optional<Date> parse_date(std::string_view text, DateFormat format) {
  text = trim(text);
  switch (format) {
    case DateFormat::iso:
      return parse_iso(text);
    case DateFormat::year:
      return parse_year(text);
    case DateFormat::nber_days: {
      auto n = to_int<std::int32_t>(text);
      if (!n) return std::nullopt;
      static const Date kBase = *Date::from_ymd(1960, 1, 1);
      return Date(kBase.days() + *n);
    }
    case DateFormat::automatic:
      if (text.find('-') != std::string_view::npos) return parse_iso(text);
      return parse_year(text);
  }
  return std::nullopt;
}

Date require_date(std::string_view text, std::string_view what) {
  auto d = parse_date(text);
  if (!d) {
    throw ConfigError(std::string(what) + ": invalid date '" + std::string(text) +
                      "' (expected YYYY-MM-DD or YYYY)");
  }
  return *d;
}

}  // namespace citevec
