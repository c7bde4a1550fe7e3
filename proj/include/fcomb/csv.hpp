#pragma once
// CSV interchange. Tables are built as typed cells and rendered with
// 17-significant-digit decimals so every double survives a write/read
// round trip. Ingestion shares one format across commands: a header row
// `id,t1,...,tk` whose time cells are the sample times, then one row per
// subject with empty cells marking unobserved values. Parse failures name
// the offending row and column (1-based, header included).

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fcomb/errors.hpp>
#include <fcomb/grid.hpp>
#include <fcomb/smooth.hpp>

namespace fcomb {

// Shortest fixed form that reproduces the double exactly on re-parse.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// One typed cell: either free text (ids, labels) or a full-precision number.
struct CsvCell {
  std::string text;
  double number = 0.0;
  bool is_number = false;

  CsvCell(std::string s) : text(std::move(s)) {}
  CsvCell(const char* s) : text(s) {}
  CsvCell(double v) : number(v), is_number(true) {}
  CsvCell(int v) : number(v), is_number(true) {}

  std::string rendered() const {
    if (!is_number) return text;
    if (number == static_cast<long long>(number) &&
        std::abs(number) < 1e15) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%lld",
                    static_cast<long long>(number));
      return std::string(buf);
    }
    return format_double(number);
  }
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CsvCell>> rows;

  std::string rendered() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) os << ',';
      os << columns[i];
    }
    os << '\n';
    for (const std::vector<CsvCell>& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        os << row[i].rendered();
      }
      os << '\n';
    }
    return os.str();
  }
};

// Header plus per-subject value rows for curves sampled on a shared grid.
// Header time cells carry the grid values themselves, so the file is
// self-describing and re-ingestible.
inline CsvTable curves_table(const std::vector<std::string>& ids,
                             const TimeGrid& grid,
                             const std::vector<Vec>& values) {
  if (ids.size() != values.size())
    throw invalid_input("curves_table: id and value counts differ");
  CsvTable table;
  table.columns.push_back("id");
  for (int j = 0; j < grid.k(); ++j)
    table.columns.push_back(format_double(grid.t(j)));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != grid.t.size())
      throw invalid_input("curves_table: value length does not match grid");
    std::vector<CsvCell> row;
    row.reserve(static_cast<std::size_t>(grid.k()) + 1);
    row.emplace_back(ids[i]);
    for (int j = 0; j < grid.k(); ++j) row.emplace_back(values[i](j));
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct IngestResult {
  TimeGrid grid;                   // header times, rescaled onto [0,1]
  std::vector<RawRecord> records;  // one per data row, missing cells dropped
  std::vector<std::string> ids;
  std::vector<SampledCurve> curves;  // filled only when grid_ready
  bool grid_ready = false;           // every cell observed in every row
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string trim_cell(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      cells.push_back(trim_cell(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return cells;
}

inline bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE) return false;
  out = v;
  return true;
}

}  // namespace detail

inline IngestResult ingest_csv_text(const std::string& text) {
  // Physical lines with their 1-based file positions; blank lines skipped.
  std::vector<std::pair<int, std::string>> lines;
  {
    std::size_t start = 0;
    int lineno = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        ++lineno;
        std::string line = text.substr(start, i - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!detail::trim_cell(line).empty()) lines.emplace_back(lineno, line);
        start = i + 1;
      }
    }
  }
  if (lines.empty()) throw invalid_input("no data rows");

  IngestResult out;

  // Header: id label plus the sample times.
  const std::vector<std::string> head = detail::split_cells(lines[0].second);
  if (head.size() < 4)
    throw invalid_input(
        "header needs an id column and at least 3 time columns");
  const int k = static_cast<int>(head.size()) - 1;
  Vec times(k);
  for (int j = 0; j < k; ++j) {
    double v;
    if (!detail::parse_number(head[static_cast<std::size_t>(j) + 1], v)) {
      std::ostringstream os;
      os << "row " << lines[0].first << ", column " << j + 2
         << ": non-numeric header time '"
         << head[static_cast<std::size_t>(j) + 1] << "'";
      throw invalid_input(os.str(), static_cast<std::size_t>(j));
    }
    times(j) = v;
  }
  for (int j = 1; j < k; ++j) {
    if (!(times(j) > times(j - 1))) {
      std::ostringstream os;
      os << "row " << lines[0].first << ", column " << j + 2
         << ": header times not strictly increasing";
      throw invalid_input(os.str(), static_cast<std::size_t>(j));
    }
  }
  if (times(0) != 0.0 || times(k - 1) != 1.0) {
    std::ostringstream os;
    os << "header times span [" << format_double(times(0)) << ", "
       << format_double(times(k - 1)) << "]; rescaled affinely onto [0,1]";
    out.warnings.push_back(os.str());
    const double lo = times(0), span = times(k - 1) - times(0);
    for (int j = 0; j < k; ++j) times(j) = (times(j) - lo) / span;
    times(0) = 0.0;
    times(k - 1) = 1.0;
  }
  out.grid = TimeGrid::from_values(std::move(times));

  // Data rows.
  if (lines.size() < 2) throw invalid_input("no data rows");
  bool any_missing = false;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const int fileline = lines[r].first;
    const std::vector<std::string> cells = detail::split_cells(lines[r].second);
    if (static_cast<int>(cells.size()) != k + 1) {
      std::ostringstream os;
      os << "row " << fileline << ": expected " << k + 1 << " cells, got "
         << cells.size();
      throw invalid_input(os.str(), r);
    }
    std::vector<double> ts, vs;
    ts.reserve(static_cast<std::size_t>(k));
    vs.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      const std::string& cell = cells[static_cast<std::size_t>(j) + 1];
      if (cell.empty()) {
        any_missing = true;
        continue;
      }
      double v;
      if (!detail::parse_number(cell, v)) {
        std::ostringstream os;
        os << "row " << fileline << ", column " << j + 2
           << ": non-numeric cell '" << cell << "'";
        throw invalid_input(os.str(), static_cast<std::size_t>(j));
      }
      ts.push_back(out.grid.t(j));
      vs.push_back(v);
    }
    RawRecord rec;
    rec.times = Eigen::Map<const Vec>(ts.data(), static_cast<int>(ts.size()));
    rec.observations =
        Eigen::Map<const Vec>(vs.data(), static_cast<int>(vs.size()));
    rec.id = cells[0];
    if (ts.empty()) {
      std::ostringstream os;
      os << "row " << fileline << ": no observed values";
      out.warnings.push_back(os.str());
    }
    out.records.push_back(std::move(rec));
    out.ids.push_back(cells[0]);
  }

  out.grid_ready = !any_missing;
  if (out.grid_ready) {
    out.curves.reserve(out.records.size());
    for (const RawRecord& rec : out.records)
      out.curves.push_back(SampledCurve{out.grid, rec.observations});
  }
  return out;
}

inline IngestResult ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot open input file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_csv_text(buf.str());
}

}  // namespace fcomb
