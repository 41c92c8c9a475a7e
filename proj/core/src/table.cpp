#include "idslab/table.hpp"

#include <stdexcept>

#include "idslab/measure_text.hpp"

namespace idslab {

void Table::add_row(std::initializer_list<double> values) {
  add_row(std::vector<double>(values));
}

void Table::add_row(std::vector<double> values) {
  if (values.size() != columns.size()) throw std::invalid_argument("table row arity mismatch");
  rows.push_back(std::move(values));
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ",";
    out += columns[i];
  }
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += format_double(row[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace idslab
