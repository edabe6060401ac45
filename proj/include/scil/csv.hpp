#ifndef SCIL_CSV_HPP
#define SCIL_CSV_HPP

#include <charconv>
#include <string>
#include <system_error>
#include <vector>

#include "scil/errors.hpp"

namespace scil::csv {

// Shortest round-trip representation; locale-independent, so files are
// byte-stable across runs and platforms.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline double parse_double(const std::string& field, int line_number) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{}) {
    throw_ingestion("malformed numeric field '" + field + "' at line " +
                    std::to_string(line_number));
  }
  return value;
}

inline long parse_long(const std::string& field, int line_number) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  long value = 0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw_ingestion("malformed integer field '" + field + "' at line " +
                    std::to_string(line_number));
  }
  return value;
}

}  // namespace scil::csv

#endif
