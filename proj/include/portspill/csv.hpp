#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace portspill::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split_line(std::string_view line);

// Quotes a field only when it needs it.
std::string escape(std::string_view field);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

// Strict parsers; return nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Header-driven reader. Blank lines are skipped; a UTF-8 BOM on the header is
// ignored.
class Reader {
 public:
  // Throws Error(Io) when the file cannot be opened.
  explicit Reader(const std::string& path);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::optional<std::size_t> column(std::string_view name) const;
  // Throws Error(MalformedRow) naming the missing column.
  std::size_t require_column(std::string_view name) const;

  // Reads the next record into `fields`; false at end of file.
  bool next(std::vector<std::string>& fields);
  // 1-based line number of the record returned by the last next().
  std::size_t line_number() const noexcept { return line_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::size_t line_ = 0;
};

// Builds CSV text in memory; callers decide how to persist it.
class Writer {
 public:
  void row(const std::vector<std::string>& fields);
  const std::string& str() const noexcept { return out_; }

 private:
  std::string out_;
};

// Writes `content` to `path`, creating parent directories. Returns false and
// leaves the file untouched when it already holds exactly `content`.
bool write_if_changed(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace portspill::csv
