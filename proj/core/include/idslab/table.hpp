#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace idslab {

// Numeric table with named columns; serializes to CSV with 17-significant-
// digit floats so identical data always produces identical bytes.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add_row(std::initializer_list<double> values);
  void add_row(std::vector<double> values);
  std::string to_csv() const;
};

}  // namespace idslab
