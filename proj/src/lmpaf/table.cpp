#include "lmpaf/table.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lmpaf/errors.hpp"
#include "lmpaf/format.hpp"

namespace lmpaf {

Table::Cell Table::Cell::of(double v) {
  Cell c;
  c.kind = Kind::Number;
  c.number = v;
  return c;
}

Table::Cell Table::Cell::of(std::string v) {
  Cell c;
  c.kind = Kind::Text;
  c.text = std::move(v);
  return c;
}

Table::Cell Table::Cell::empty() { return Cell{}; }

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) fail(errc::invalid_argument, "table needs columns");
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    fail(errc::invalid_argument, "row width does not match table");
  rows_.push_back(std::move(row));
}

const Table::Cell& Table::at(std::size_t row, std::size_t col) const {
  if (row >= rows_.size() || col >= columns_.size())
    fail(errc::invalid_argument, "table index out of range");
  return rows_[row][col];
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_escape(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t j = 0; j < columns_.size(); ++j)
    os << (j ? "," : "") << csv_escape(columns_[j]);
  os << "\n";
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) os << ",";
      switch (row[j].kind) {
        case Cell::Kind::Empty: break;
        case Cell::Kind::Number: os << format_double(row[j].number); break;
        case Cell::Kind::Text: os << csv_escape(row[j].text); break;
      }
    }
    os << "\n";
  }
  return os.str();
}

void Table::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open '" + path + "' for writing");
  f << to_csv();
  if (!f) fail(errc::io_error, "failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& where) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) fail(errc::parse_error, "unterminated quote " + where);
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

Table Table::read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line))
    fail(errc::parse_error, "'" + path + "' is empty (header row mandatory)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Table t(split_csv_line(line, "in header of " + path));
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields =
        split_csv_line(line, "at " + path + ":" + std::to_string(lineno));
    if (fields.size() != t.columns_.size())
      fail(errc::parse_error, path + ":" + std::to_string(lineno) +
                                  ": expected " +
                                  std::to_string(t.columns_.size()) +
                                  " fields, got " +
                                  std::to_string(fields.size()));
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (auto& s : fields) {
      if (s.empty()) {
        row.push_back(Cell::empty());
        continue;
      }
      double value = 0.0;
      auto res = std::from_chars(s.data(), s.data() + s.size(), value);
      if (res.ec == std::errc() && res.ptr == s.data() + s.size())
        row.push_back(Cell::of(value));
      else
        row.push_back(Cell::of(std::move(s)));
    }
    t.rows_.push_back(std::move(row));
  }
  return t;
}

}  // namespace lmpaf
