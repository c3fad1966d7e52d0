#pragma once

// Minimal CSV helpers. Numbers are written with 6 significant digits.

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace boltshare::csv {

inline constexpr int kSignificantDigits = 6;

inline void append_number(std::string& buf, double v) {
  char tmp[32];
  auto [end, ec] = std::to_chars(tmp, tmp + sizeof tmp, v, std::chars_format::general,
                                 kSignificantDigits);
  if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
  buf.append(tmp, end);
}

inline std::string format_number(double v) {
  std::string s;
  append_number(s, v);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view field) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw std::invalid_argument("csv: not a number: '" + std::string(field) + "'");
  return v;
}

}  // namespace boltshare::csv
