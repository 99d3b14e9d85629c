#include "ndswarm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

namespace ndswarm {

Dataset::Dataset(std::vector<std::string> names, Eigen::MatrixXd values,
                 std::optional<std::vector<std::string>> labels, std::string source)
    : names_(std::move(names)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      source_(std::move(source)) {
  if (values_.rows() < 1) throw DatasetError("dataset needs at least one dimension");
  if (values_.cols() < 1) throw DatasetError("dataset needs at least one data point");
  if (static_cast<Eigen::Index>(names_.size()) != values_.rows()) {
    throw DatasetError("expected " + std::to_string(values_.rows()) +
                       " dimension names, got " + std::to_string(names_.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw DatasetError("dimension names must be non-empty");
    if (!seen.insert(name).second) throw DatasetError("duplicate dimension name '" + name + "'");
  }
  if (!values_.allFinite()) throw DatasetError("dataset contains non-finite values");
  if (labels_ && static_cast<Eigen::Index>(labels_->size()) != values_.cols()) {
    throw DatasetError("expected " + std::to_string(values_.cols()) + " labels, got " +
                       std::to_string(labels_->size()));
  }
}

std::optional<Eigen::Index> Dataset::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<Eigen::Index>(std::distance(names_.begin(), it));
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.names_ != b.names_ || a.labels_ != b.labels_) return false;
  if (a.values_.rows() != b.values_.rows() || a.values_.cols() != b.values_.cols()) return false;
  return a.values_ == b.values_;
}

MissingPolicy parse_missing_policy(std::string_view text) {
  if (text == "drop-point" || text == "drop") return MissingPolicy::DropPoint;
  if (text == "strict") return MissingPolicy::Strict;
  throw DatasetError("unknown missing policy '" + std::string(text) + "'");
}

namespace {

struct Field {
  std::string text;
  bool quoted = false;
};

struct Record {
  std::vector<Field> fields;
  std::size_t line = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// RFC 4180 style splitting: quoted fields may hold delimiters, doubled quotes
// and newlines. Blank lines are ignored.
std::vector<Record> split_records(std::string_view text, char delim) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Record> records;
  Record current;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  bool any_content = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    Field f;
    f.quoted = quoted;
    f.text = quoted ? field : std::string(trim(field));
    current.fields.push_back(std::move(f));
    field.clear();
    quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (any_content) records.push_back(std::move(current));
    current = Record{};
    any_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      in_quotes = true;
      any_content = true;
    } else if (c == delim) {
      end_field();
      any_content = true;
    } else if (c == '\n') {
      end_record();
      ++line;
      current.line = line;
    } else {
      if (c != '\r' && c != ' ' && c != '\t') any_content = true;
      if (!quoted) field.push_back(c);
    }
  }
  if (in_quotes) throw DatasetError("unterminated quoted field starting near line " +
                                    std::to_string(current.line));
  if (any_content || !field.empty()) end_record();
  return records;
}

enum class CellKind { Number, Missing, Garbage };

CellKind parse_cell(const Field& f, double& out) {
  std::string_view s = f.text;
  if (!f.quoted) s = trim(s);
  if (s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == "null") {
    return CellKind::Missing;
  }
  if (s.front() == '+') s.remove_prefix(1);
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out, std::chars_format::general);
  if (ec == std::errc::result_out_of_range) return CellKind::Missing;
  if (ec != std::errc{} || ptr != last) return CellKind::Garbage;
  if (!std::isfinite(out)) return CellKind::Missing;
  return CellKind::Number;
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvOptions& options, std::string source) {
  const auto records = split_records(text, options.delimiter);
  if (records.empty()) throw DatasetError(source + ": empty file, header row required");

  const auto& header = records.front().fields;
  std::vector<std::string> header_names;
  std::unordered_set<std::string> seen;
  for (const auto& f : header) {
    if (f.text.empty()) throw DatasetError(source + ": empty column name in header");
    if (!seen.insert(f.text).second) {
      throw DatasetError(source + ": duplicate column name '" + f.text + "'");
    }
    header_names.push_back(f.text);
  }
  const std::size_t columns = header_names.size();

  std::optional<std::size_t> label_col;
  if (options.label_column) {
    auto it = std::find(header_names.begin(), header_names.end(), *options.label_column);
    if (it == header_names.end()) {
      throw DatasetError(source + ": label column '" + *options.label_column + "' not found");
    }
    label_col = static_cast<std::size_t>(std::distance(header_names.begin(), it));
  }

  std::vector<std::string> names;
  std::vector<std::size_t> numeric_cols;
  for (std::size_t c = 0; c < columns; ++c) {
    if (label_col && c == *label_col) continue;
    names.push_back(header_names[c]);
    numeric_cols.push_back(c);
  }
  if (names.empty()) throw DatasetError(source + ": no numeric columns");

  const std::size_t rows = records.size() - 1;
  std::vector<double> cells(rows * names.size());
  std::vector<char> keep(rows, 1);
  std::vector<std::size_t> numeric_seen(names.size(), 0);
  std::vector<std::size_t> garbage_seen(names.size(), 0);
  std::vector<std::string> labels;
  labels.reserve(rows);

  for (std::size_t r = 0; r < rows; ++r) {
    const auto& rec = records[r + 1];
    if (rec.fields.size() != columns) {
      throw DatasetError(source + ": ragged row at line " + std::to_string(rec.line) + " (" +
                         std::to_string(rec.fields.size()) + " fields, expected " +
                         std::to_string(columns) + ")");
    }
    if (label_col) labels.push_back(rec.fields[*label_col].text);
    for (std::size_t j = 0; j < numeric_cols.size(); ++j) {
      double v = 0.0;
      const auto kind = parse_cell(rec.fields[numeric_cols[j]], v);
      if (kind == CellKind::Number) {
        cells[r * names.size() + j] = v;
        ++numeric_seen[j];
        continue;
      }
      if (options.missing_policy == MissingPolicy::Strict) {
        throw DatasetError(source + ": " +
                           (kind == CellKind::Missing ? "missing value" : "non-numeric value '" +
                                                                             rec.fields[numeric_cols[j]].text + "'") +
                           " in column '" + names[j] + "' at line " + std::to_string(rec.line));
      }
      if (kind == CellKind::Garbage) ++garbage_seen[j];
      keep[r] = 0;
    }
  }

  for (std::size_t j = 0; j < names.size(); ++j) {
    if (numeric_seen[j] == 0 && garbage_seen[j] > 0) {
      throw DatasetError(source + ": column '" + names[j] +
                         "' is not numeric; designate it as the label column or remove it");
    }
  }

  const auto kept = static_cast<Eigen::Index>(std::count(keep.begin(), keep.end(), 1));
  if (kept == 0) throw DatasetError(source + ": no complete data points");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(names.size()), kept);
  std::optional<std::vector<std::string>> out_labels;
  if (label_col) out_labels.emplace();
  Eigen::Index col = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!keep[r]) continue;
    for (std::size_t j = 0; j < names.size(); ++j) {
      values(static_cast<Eigen::Index>(j), col) = cells[r * names.size() + j];
    }
    if (out_labels) out_labels->push_back(std::move(labels[r]));
    ++col;
  }
  return Dataset(std::move(names), std::move(values), std::move(out_labels), std::move(source));
}

Dataset parse_csv(std::istream& in, const CsvOptions& options, std::string source) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_csv(std::string_view(text), options, std::move(source));
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open '" + path.string() + "'");
  return parse_csv(in, options, path.string());
}

namespace {

void write_field(std::ostream& out, std::string_view text, char delim) {
  const bool needs_quotes =
      text.empty() || text.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string_view::npos ||
      text.front() == ' ' || text.back() == ' ' || text.front() == '\t' || text.back() == '\t';
  if (!needs_quotes) {
    out << text;
    return;
  }
  out << '"';
  for (char c : text) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_csv(const Dataset& ds, std::ostream& out, char delimiter, std::string_view label_header) {
  const bool with_labels = ds.labels().has_value();
  if (with_labels) {
    write_field(out, label_header, delimiter);
    out << delimiter;
  }
  for (std::size_t i = 0; i < ds.names().size(); ++i) {
    if (i) out << delimiter;
    write_field(out, ds.names()[i], delimiter);
  }
  out << '\n';
  char buf[64];
  for (Eigen::Index p = 0; p < ds.points(); ++p) {
    if (with_labels) {
      write_field(out, (*ds.labels())[static_cast<std::size_t>(p)], delimiter);
      out << delimiter;
    }
    for (Eigen::Index d = 0; d < ds.dims(); ++d) {
      if (d) out << delimiter;
      auto res = std::to_chars(buf, buf + sizeof buf, ds.values()(d, p));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

std::vector<DimensionSummary> summarize(const Dataset& ds) {
  std::vector<DimensionSummary> out;
  out.reserve(static_cast<std::size_t>(ds.dims()));
  std::vector<double> sorted(static_cast<std::size_t>(ds.points()));
  for (Eigen::Index d = 0; d < ds.dims(); ++d) {
    const auto row = ds.values().row(d);
    std::copy(row.begin(), row.end(), sorted.begin());
    // Accumulating in sorted order makes every statistic independent of point order.
    std::sort(sorted.begin(), sorted.end());

    double sum = 0.0;
    double comp = 0.0;
    for (double v : sorted) {
      const double t = sum + v;
      comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    }
    const auto count = static_cast<double>(sorted.size());
    const double mean = std::clamp((sum + comp) / count, sorted.front(), sorted.back());

    double sq = 0.0;
    for (double v : sorted) sq += (v - mean) * (v - mean);

    DimensionSummary s;
    s.name = ds.names()[static_cast<std::size_t>(d)];
    s.min = sorted.front();
    s.max = sorted.back();
    s.mean = mean;
    s.stddev = std::sqrt(sq / count);
    s.distinct = static_cast<std::size_t>(
        std::distance(sorted.begin(), std::unique(sorted.begin(), sorted.end())));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ndswarm
