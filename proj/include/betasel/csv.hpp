#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "betasel/data.hpp"

namespace betasel {

enum class derive_op { product, square };

/// Derived covariate: name = a*b (product) or name = a^2 (square, b ignored).
struct derive_spec {
  std::string name;
  std::string a;
  std::string b;
  derive_op op = derive_op::product;
};

/// Parse "name=colA*colB" or "name=colA^2".
inline derive_spec parse_derive(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(errc::parse, "derive: expected name=colA*colB or name=colA^2, got '" + text + "'");
  derive_spec spec;
  spec.name = text.substr(0, eq);
  const std::string rhs = text.substr(eq + 1);
  if (const auto star = rhs.find('*'); star != std::string::npos) {
    spec.a = rhs.substr(0, star);
    spec.b = rhs.substr(star + 1);
    spec.op = derive_op::product;
  } else if (rhs.size() > 2 && rhs.compare(rhs.size() - 2, 2, "^2") == 0) {
    spec.a = rhs.substr(0, rhs.size() - 2);
    spec.op = derive_op::square;
  } else {
    fail(errc::parse, "derive: unsupported expression '" + rhs + "'");
  }
  if (spec.a.empty() || (spec.op == derive_op::product && spec.b.empty()))
    fail(errc::parse, "derive: empty column name in '" + text + "'");
  return spec;
}

struct csv_ingest_options {
  std::string y_column;
  std::string y_denominator;          // optional: y = y_column / y_denominator
  std::vector<derive_spec> derive;    // appended as extra covariate columns
};

struct csv_table {
  std::vector<std::string> header;
  Eigen::MatrixXd body;
};

/// Read a numeric CSV with a header row. Ragged or non-numeric rows raise
/// parse errors carrying the 1-based file line number.
inline csv_table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open '" + path + "'");

  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) fail(errc::parse, "'" + path + "': empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  csv_table table;
  table.header = split(line);
  const std::size_t width = table.header.size();
  if (width == 0) fail(errc::parse, "'" + path + "': empty header row");

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width)
      fail(errc::parse, "'" + path + "' line " + std::to_string(lineno) + ": expected " +
                            std::to_string(width) + " fields, got " +
                            std::to_string(cells.size()));
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) {
      const std::string& cell = cells[j];
      double value = 0.0;
      const auto* begin = cell.data();
      const auto* end = cell.data() + cell.size();
      while (begin < end && *begin == ' ') ++begin;
      const auto result = std::from_chars(begin, end, value);
      if (result.ec != std::errc() || result.ptr != end)
        fail(errc::parse, "'" + path + "' line " + std::to_string(lineno) +
                              ": field '" + cell + "' is not numeric");
      row[j] = value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    fail(errc::validation, "'" + path + "': no data rows below the header");

  table.body.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      table.body(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return table;
}

/// Build a dataset from a CSV: the response is y_column (optionally divided by
/// y_denominator); every other original column plus all derived columns become
/// candidate covariates.
inline dataset ingest_csv(const std::string& path, const csv_ingest_options& opts) {
  const csv_table table = read_csv(path);
  const auto n = table.body.rows();

  auto find_col = [&](const std::string& name) -> Eigen::Index {
    for (std::size_t j = 0; j < table.header.size(); ++j)
      if (table.header[j] == name) return static_cast<Eigen::Index>(j);
    fail(errc::validation, "'" + path + "': no column named '" + name + "'");
  };

  if (opts.y_column.empty()) fail(errc::validation, "ingest: y column not configured");
  const Eigen::Index y_idx = find_col(opts.y_column);
  Eigen::VectorXd y = table.body.col(y_idx);
  if (!opts.y_denominator.empty()) {
    const Eigen::Index denom_idx = find_col(opts.y_denominator);
    y = y.cwiseQuotient(table.body.col(denom_idx));
  }
  for (Eigen::Index t = 0; t < n; ++t)
    if (!(y[t] > 0.0 && y[t] < 1.0))
      fail(errc::validation, "'" + path + "': response at row " + std::to_string(t + 1) +
                                 " is outside (0,1): " + std::to_string(y[t]));

  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (static_cast<Eigen::Index>(j) == y_idx) continue;
    names.push_back(table.header[j]);
    cols.push_back(table.body.col(static_cast<Eigen::Index>(j)));
  }
  for (const auto& spec : opts.derive) {
    const Eigen::VectorXd a = table.body.col(find_col(spec.a));
    Eigen::VectorXd derived;
    if (spec.op == derive_op::product)
      derived = a.cwiseProduct(table.body.col(find_col(spec.b)));
    else
      derived = a.cwiseProduct(a);
    names.push_back(spec.name);
    cols.push_back(std::move(derived));
  }

  Eigen::MatrixXd columns(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    columns.col(static_cast<Eigen::Index>(j)) = cols[j];
  return dataset::make(std::move(y), std::move(names), std::move(columns));
}

}  // namespace betasel
