#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace emoesg::csv {

/// One parsed record and the physical line it started on (1-based).
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

/// RFC-4180 reader: quoted fields may contain commas, doubled quotes and
/// line breaks. Accepts LF or CRLF line endings; a UTF-8 BOM on the first
/// line is dropped.
class Reader {
 public:
  Reader(std::istream& in, std::string source_name);

  /// Next record, or nullopt at end of input. Throws DataError on an
  /// unterminated quoted field.
  std::optional<Record> next();

  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
  bool first_ = true;
};

/// Reads the header record and checks it against `expected` (exact names,
/// exact order). Throws DataError naming the first mismatch.
void expect_header(Reader& reader, const std::vector<std::string>& expected);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// Writes one record terminated by LF.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace emoesg::csv
