#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collabmap/error.hpp"

namespace collabmap::csv {

class CsvError : public Error {
 public:
  using Error::Error;
};

struct Row {
  std::size_t line = 0;  // 1-based physical line where the row starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
/// newlines. Blank lines are skipped.
std::vector<Row> read(std::istream& in);

std::string escape(std::string_view field);
void write_row(std::ostream& out, std::span<const std::string> fields);
void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);

}  // namespace collabmap::csv
