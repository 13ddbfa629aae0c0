#include "synthpop/csv.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "synthpop/common.hpp"

namespace synthpop::csv {

bool split_record(std::string_view line, Row& out, char delimiter) {
  out.clear();
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
    } else if (c == delimiter) {
      out.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
    } else if (c == '\r' && i + 1 == line.size()) {
      // tolerate CRLF
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return false;
  out.push_back(std::move(field));
  return true;
}

Reader::Reader(std::istream& in, std::string source_name)
    : in_(&in), source_(std::move(source_name)) {
  read_header();
}

Reader::Reader(const std::filesystem::path& path)
    : owned_(std::make_unique<std::ifstream>(path)), in_(owned_.get()),
      source_(path.string()) {
  if (!*owned_) throw DataError("cannot open '" + source_ + "'");
  read_header();
}

void Reader::read_header() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_;
    if (line_ == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      line.erase(0, 3);
    }
    if (trim(line).empty()) continue;
    if (!split_record(line, header_)) {
      throw DataError(source_ + ": unterminated quote in header");
    }
    for (auto& h : header_) h = std::string(trim(h));
    return;
  }
  throw DataError(source_ + ": missing header row");
}

std::optional<std::size_t> Reader::find(std::string_view column) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == column) return i;
  }
  return std::nullopt;
}

std::size_t Reader::require(std::string_view column) const {
  if (auto idx = find(column)) return *idx;
  throw DataError(fmt::format("{}: missing required column '{}'", source_, column));
}

bool Reader::next(Row& row) {
  std::string line;
  while (std::getline(*in_, line)) {
    ++line_;
    record_line_ = line_;
    if (trim(line).empty()) continue;
    std::string record = line;
    while (!split_record(record, row)) {
      if (!std::getline(*in_, line)) {
        throw DataError(
            fmt::format("{}:{}: unterminated quoted field", source_, record_line_));
      }
      ++line_;
      record += '\n';
      record += line;
    }
    row.resize(std::max(row.size(), header_.size()));
    return true;
  }
  return false;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << escape(fields[i]);
  }
  out_ << '\n';
}

void Writer::row(std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) out_ << ',';
    first = false;
    out_ << escape(f);
  }
  out_ << '\n';
}

AtomicFile::AtomicFile(std::filesystem::path path)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw DataError("cannot write '" + tmp_.string() + "'");
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw DataError("write failed for '" + tmp_.string() + "'");
  out_.close();
  std::filesystem::rename(tmp_, path_);
  committed_ = true;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

}  // namespace synthpop::csv
