#include "table_reader.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "citevec/errors.hpp"

namespace citevec::detail {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void split(std::string_view line, char delim, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    auto end = line.find(delim, start);
    if (end == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
}

}  // namespace

std::string_view clean_field(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '"' || s.back() == '\r' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

DelimitedFile::DelimitedFile(const std::filesystem::path& path,
                             std::optional<char> delimiter)
    : path_(path.string()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path_ + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  content_ = std::move(buf).str();
  if (!in.good() && !in.eof()) throw InputError(path_ + ": read failure");

  // Header: first non-blank line.
  std::string_view header_line;
  while (pos_ < content_.size()) {
    auto nl = content_.find('\n', pos_);
    if (nl == std::string::npos) nl = content_.size();
    header_line = clean_field(std::string_view(content_).substr(pos_, nl - pos_));
    pos_ = nl + 1;
    ++line_;
    if (!header_line.empty()) break;
  }
  if (header_line.empty()) return;  // empty file: no header, no rows

  if (delimiter) {
    delim_ = *delimiter;
  } else if (header_line.find('\t') != std::string_view::npos) {
    delim_ = '\t';
  } else if (header_line.find(',') != std::string_view::npos) {
    delim_ = ',';
  } else if (header_line.find(';') != std::string_view::npos) {
    delim_ = ';';
  } else {
    delim_ = '\t';
  }
  std::vector<std::string_view> fields;
  split(header_line, delim_, fields);
  for (auto f : fields) header_.push_back(lower(clean_field(f)));
}

std::size_t DelimitedFile::column(std::span<const std::string> names) const {
  for (const auto& name : names) {
    auto want = lower(name);
    auto it = std::find(header_.begin(), header_.end(), want);
    if (it != header_.end()) return static_cast<std::size_t>(it - header_.begin());
  }
  std::string msg = path_ + ": header mismatch, expected a column named";
  for (std::size_t i = 0; i < names.size(); ++i)
    msg += (i ? " or '" : " '") + names[i] + "'";
  throw InputError(msg);
}

bool DelimitedFile::next(std::vector<std::string_view>& fields) {
  while (pos_ < content_.size()) {
    auto nl = content_.find('\n', pos_);
    if (nl == std::string::npos) nl = content_.size();
    std::string_view row = std::string_view(content_).substr(pos_, nl - pos_);
    pos_ = nl + 1;
    ++line_;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (clean_field(row).empty()) continue;
    split(row, delim_, fields);
    return true;
  }
  return false;
}

std::string DelimitedFile::where() const {
  return path_ + ":" + std::to_string(line_) + ": ";
}

}  // namespace citevec::detail
