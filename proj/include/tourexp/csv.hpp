#pragma once

#include <istream>
#include <string>
#include <vector>

namespace tourexp::csv {

/// Splits one CSV line into fields. Understands double-quoted fields with
/// "" escapes; embedded newlines are not supported (none of our formats
/// need them). A trailing \r is stripped first.
std::vector<std::string> split_line(const std::string& line);

/// Joins fields into a line, quoting only fields that need it.
std::string join_row(const std::vector<std::string>& fields);

/// Line-oriented reader with 1-based line numbers for error messages.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Reads the next non-empty line; returns false at EOF.
  bool next(std::vector<std::string>& fields);

  long line_number() const { return line_no_; }

 private:
  std::istream& in_;
  long line_no_ = 0;
};

}  // namespace tourexp::csv
