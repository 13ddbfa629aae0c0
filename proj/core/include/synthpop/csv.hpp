#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace synthpop::csv {

using Row = std::vector<std::string>;

/// Splits one logical CSV record. Quoted fields may contain commas and
/// doubled quotes. Returns false if a quoted field is left open (the caller
/// then appends the next physical line and retries).
bool split_record(std::string_view line, Row& out, char delimiter = ',');

/// Streaming reader for comma separated files with a mandatory header row.
class Reader {
 public:
  Reader(std::istream& in, std::string source_name);
  explicit Reader(const std::filesystem::path& path);

  const Row& header() const { return header_; }
  std::optional<std::size_t> find(std::string_view column) const;
  /// Column index, or DataError naming the column and source.
  std::size_t require(std::string_view column) const;

  bool next(Row& row);
  /// 1-based physical line number of the record returned by the last next().
  std::size_t line_number() const { return record_line_; }
  const std::string& source() const { return source_; }

 private:
  void read_header();

  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_;
  std::string source_;
  Row header_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<std::string_view> fields);

 private:
  std::ostream& out_;
};

/// Writes to `<path>.tmp` and renames onto `path` on commit(). An uncommitted
/// file is removed on destruction.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

// Strict numeric field parsers; nullopt on any trailing garbage.
std::optional<long long> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);
std::string_view trim(std::string_view s);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace synthpop::csv
