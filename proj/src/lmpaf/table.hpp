#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace lmpaf {

// Rectangular output table: every artifact CSV goes through this type so the
// formatting (shortest round-trip doubles, LF endings) is uniform, and the C
// API can expose results without schema-specific accessors.
class Table {
 public:
  struct Cell {
    enum class Kind { Empty, Number, Text } kind = Kind::Empty;
    double number = std::numeric_limits<double>::quiet_NaN();
    std::string text;

    static Cell of(double v);
    static Cell of(std::string v);
    static Cell empty();
  };

  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return columns_.size(); }

  void add_row(std::vector<Cell> row);
  const Cell& at(std::size_t row, std::size_t col) const;

  std::string to_csv() const;
  void write_csv(const std::string& path) const;
  static Table read_csv(const std::string& path);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace lmpaf
