#include "emoesg/csv.hpp"

#include "emoesg/errors.hpp"

namespace emoesg::csv {

Reader::Reader(std::istream& in, std::string source_name) : in_(in), source_(std::move(source_name)) {}

std::optional<Record> Reader::next() {
  std::string line;
  // Skip blank lines between records.
  while (true) {
    if (!std::getline(in_, line)) return std::nullopt;
    ++line_;
    if (first_) {
      first_ = false;
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }

  Record rec;
  rec.line = line_;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i >= line.size()) {
      if (quoted) {
        // Quoted field spans a line break.
        std::string more;
        if (!std::getline(in_, more)) {
          throw DataError::at(source_, rec.line, "unterminated quoted field");
        }
        ++line_;
        if (!more.empty() && more.back() == '\r') more.pop_back();
        field.push_back('\n');
        line = std::move(more);
        i = 0;
        continue;
      }
      rec.fields.push_back(std::move(field));
      break;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field.push_back(c);
      ++i;
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
      ++i;
      continue;
    }
    if (c == ',') {
      rec.fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
      ++i;
      continue;
    }
    field.push_back(c);
    ++i;
  }
  return rec;
}

void expect_header(Reader& reader, const std::vector<std::string>& expected) {
  auto header = reader.next();
  if (!header) throw DataError(reader.source() + ": empty file, expected a header row");
  if (header->fields.size() != expected.size()) {
    throw DataError::at(reader.source(), header->line,
                        "expected " + std::to_string(expected.size()) + " header columns, found " +
                            std::to_string(header->fields.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header->fields[i] != expected[i]) {
      throw DataError::at(reader.source(), header->line,
                          "header column " + std::to_string(i + 1) + " is '" + header->fields[i] +
                              "', expected '" + expected[i] + "'");
    }
  }
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace emoesg::csv
