#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gls_granger/error.hpp"
#include "gls_granger/time_series.hpp"

namespace gls_granger {

/// Equally long, uniquely labelled series plus optional row labels (e.g. dates).
class Dataset {
 public:
  Dataset(std::vector<TimeSeries> columns, std::vector<std::string> row_labels = {}, std::string source = "generated")
      : columns_(std::move(columns)), row_labels_(std::move(row_labels)), source_(std::move(source)) {
    if (columns_.empty()) throw InvalidArgument("dataset needs at least one column");
    std::set<std::string> seen;
    for (const TimeSeries& c : columns_) {
      if (!seen.insert(c.name()).second) throw InvalidArgument("duplicate column label '" + c.name() + "'");
      if (c.size() != columns_.front().size()) throw InvalidArgument("column '" + c.name() + "' has a different length");
    }
    if (!row_labels_.empty() && row_labels_.size() != rows()) {
      throw InvalidArgument("row labels do not match the number of rows");
    }
  }

  [[nodiscard]] const std::vector<TimeSeries>& columns() const noexcept { return columns_; }
  [[nodiscard]] const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
  [[nodiscard]] const std::string& source() const noexcept { return source_; }
  [[nodiscard]] std::size_t rows() const noexcept { return columns_.front().size(); }

  [[nodiscard]] std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) out.push_back(c.name());
    return out;
  }

  [[nodiscard]] const TimeSeries* find(std::string_view label) const {
    for (const auto& c : columns_) {
      if (c.name() == label) return &c;
    }
    return nullptr;
  }

  /// Differences every column; row labels keep the later timestamp of each difference.
  [[nodiscard]] Dataset differenced(std::size_t order) const {
    if (order == 0) return *this;
    std::vector<TimeSeries> cols;
    for (const auto& c : columns_) cols.push_back(difference(c, order));
    std::vector<std::string> labels;
    if (!row_labels_.empty()) labels.assign(row_labels_.begin() + static_cast<std::ptrdiff_t>(order), row_labels_.end());
    return Dataset(std::move(cols), std::move(labels), source_);
  }

 private:
  std::vector<TimeSeries> columns_;
  std::vector<std::string> row_labels_;
  std::string source_;
};

struct CsvOptions {
  bool has_header = true;
  /// Name of a non-numeric label column (e.g. a date) to keep aside; compared against the header.
  std::optional<std::string> date_column;
  char delimiter = ',';
};

namespace detail {

// Splits CSV text into records, honouring double-quoted fields with "" escapes. Each record
// remembers its one-based line number for error messages.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line;
};

inline std::vector<CsvRecord> split_csv(std::string_view text, char delimiter) {
  std::vector<CsvRecord> records;
  CsvRecord current{{}, 1};
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{{}, line};
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (ch == delimiter) {
      end_field();
    } else if (ch == '\r') {
      // tolerate CRLF
    } else if (ch == '\n') {
      ++line;
      end_record();
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", current.line, current.fields.size() + 1);
  if (field_started || !current.fields.empty()) end_record();
  return records;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace detail

/**
 * @brief Parses a rectangular CSV table into a Dataset.
 *
 * Every column except the optional date column must be numeric. Errors carry the one-based
 * source line and column of the offending cell.
 */
[[nodiscard]] inline Dataset parse_csv(std::string_view text, const CsvOptions& options = {},
                                       std::string source = "<memory>") {
  const std::vector<detail::CsvRecord> records = detail::split_csv(text, options.delimiter);
  if (records.empty()) throw ParseError("CSV input is empty", 0, 0);
  const std::size_t width = records.front().fields.size();

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (options.has_header) {
    for (const auto& h : records.front().fields) header.emplace_back(detail::trim(h));
    first_data = 1;
    std::set<std::string> seen;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c].empty()) throw ParseError("empty column name", records.front().line, c + 1);
      if (!seen.insert(header[c]).second) {
        throw ParseError("duplicate column name '" + header[c] + "'", records.front().line, c + 1);
      }
    }
  } else {
    for (std::size_t c = 0; c < width; ++c) header.push_back("col" + std::to_string(c));
  }

  std::optional<std::size_t> date_index;
  if (options.date_column) {
    const auto it = std::find(header.begin(), header.end(), *options.date_column);
    if (it == header.end()) throw ParseError("date column '" + *options.date_column + "' not found", 0, 0);
    date_index = static_cast<std::size_t>(it - header.begin());
  }
  if (width - (date_index ? 1 : 0) == 0) throw ParseError("CSV has no numeric columns", 0, 0);

  std::vector<std::vector<double>> values(width);
  std::vector<std::string> row_labels;
  for (std::size_t r = first_data; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields but found " + std::to_string(rec.fields.size()),
                       rec.line, 0);
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (date_index && c == *date_index) {
        row_labels.emplace_back(detail::trim(rec.fields[c]));
        continue;
      }
      const auto v = detail::parse_number(rec.fields[c]);
      if (!v) {
        throw ParseError("non-numeric value '" + rec.fields[c] + "' in column '" + header[c] + "'", rec.line, c + 1);
      }
      values[c].push_back(*v);
    }
  }
  if (records.size() == first_data) throw ParseError("CSV has a header but no data rows", 0, 0);

  std::vector<TimeSeries> columns;
  for (std::size_t c = 0; c < width; ++c) {
    if (date_index && c == *date_index) continue;
    columns.emplace_back(std::move(values[c]), header[c]);
  }
  return Dataset(std::move(columns), std::move(row_labels), std::move(source));
}

/// Reads and parses a CSV file; an unreadable file is reported as a ParseError at row 0.
[[nodiscard]] inline Dataset ingest_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options, path);
}

namespace detail {

inline std::string quote_csv(const std::string& s, char delimiter) {
  if (s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// Writes a dataset with a header row; values use 17 significant digits so they parse back exactly.
inline void write_csv(std::ostream& out, const Dataset& data, char delimiter = ',',
                      const std::string& row_label_header = "date") {
  const bool labelled = !data.row_labels().empty();
  bool first = true;
  if (labelled) {
    out << detail::quote_csv(row_label_header, delimiter);
    first = false;
  }
  for (const auto& c : data.columns()) {
    if (!first) out << delimiter;
    out << detail::quote_csv(c.name(), delimiter);
    first = false;
  }
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    first = true;
    if (labelled) {
      out << detail::quote_csv(data.row_labels()[r], delimiter);
      first = false;
    }
    for (const auto& c : data.columns()) {
      if (!first) out << delimiter;
      out << c[r];
      first = false;
    }
    out << '\n';
  }
}

}  // namespace gls_granger
