#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace citevec {

// Calendar date at day granularity, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

  static std::optional<Date> from_ymd(int year, unsigned month, unsigned day);

  constexpr std::int32_t days() const { return days_; }
  std::chrono::year_month_day ymd() const;
  int year() const;

  // YYYY-MM-DD
  std::string iso() const;

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_ = 0;
};

enum class DateFormat {
  automatic,  // ISO-8601 if the text contains '-', a bare 4-digit year otherwise
  iso,        // YYYY-MM-DD
  year,       // YYYY, read as January 1 of that year
  nber_days,  // integer days since 1960-01-01 (NBER GDATE column)
};

std::optional<DateFormat> parse_date_format(std::string_view name);

// Returns nullopt for malformed text or impossible dates such as 1997-02-30.
std::optional<Date> parse_date(std::string_view text,
                               DateFormat format = DateFormat::automatic);

// Throws ConfigError naming `what` when the text is not a valid date.
Date require_date(std::string_view text, std::string_view what);

}  // namespace citevec
