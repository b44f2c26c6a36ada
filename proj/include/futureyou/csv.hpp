#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "futureyou/error.hpp"

namespace futureyou::csv {

class ParseError : public Error {
 public:
  using Error::Error;
};

using Row = std::vector<std::string>;

// RFC 4180: fields with commas, quotes or line breaks are quoted.
std::string escape(std::string_view field);
std::string format_row(const Row& row);  // terminated by "\n"

// Accepts LF or CRLF line ends; a trailing newline does not add a row.
std::vector<Row> parse(std::string_view text);

// Header-indexed view over parsed rows.
class Table {
 public:
  explicit Table(std::vector<Row> rows);
  const Row& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  const Row& row(std::size_t i) const { return rows_[i]; }
  // -1 if absent.
  int column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::string_view column) const;

 private:
  Row header_;
  std::vector<Row> rows_;
};

}  // namespace futureyou::csv
