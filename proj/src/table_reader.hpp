#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace citevec::detail {

// Header-first delimiter-separated text, read fully into memory.
class DelimitedFile {
 public:
  DelimitedFile(const std::filesystem::path& path, std::optional<char> delimiter);

  // Position of the first header column matching one of `names`
  // (case-insensitive). Throws InputError when none matches.
  std::size_t column(std::span<const std::string> names) const;

  // Splits the next non-blank data line into `fields`; false at end of file.
  bool next(std::vector<std::string_view>& fields);

  // 1-based line number of the row returned by the last next().
  std::size_t line() const { return line_; }
  const std::string& path() const { return path_; }
  char delimiter() const { return delim_; }

  // "path:line: "
  std::string where() const;

 private:
  std::string path_;
  std::string content_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  char delim_ = '\t';
  std::vector<std::string> header_;
};

// Strips surrounding whitespace, carriage returns and double quotes.
std::string_view clean_field(std::string_view s);

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  s = clean_field(s);
  Int v{};
  if (s.empty()) return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace citevec::detail
