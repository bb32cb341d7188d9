#include "enet/sample.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace enet {

void Sample::validate() const {
  if (y.size() == 0) throw std::invalid_argument("Sample: n must be positive");
  if (x.rows() != y.size())
    throw std::invalid_argument("Sample: len(x) != len(y)");
  if (!x.allFinite() || !y.allFinite())
    throw std::invalid_argument("Sample: non-finite entry");
}

namespace {

std::vector<double> parse_line(const std::string& line, char delim,
                               std::size_t lineno) {
  std::vector<double> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(field, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("parse error at line " + std::to_string(lineno) +
                               ": '" + field + "' is not a number");
    }
    while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos])))
      ++pos;
    if (pos != field.size())
      throw std::runtime_error("parse error at line " + std::to_string(lineno) +
                               ": trailing characters in '" + field + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

Sample load_sample(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_sample: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool skipped_header = false;
  char delim = opts.delimiter;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (opts.has_header && !skipped_header) {
      skipped_header = true;
      continue;
    }
    if (delim == 0) delim = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<double> vals = parse_line(line, delim, lineno);
    if (vals.size() < 2)
      throw std::runtime_error("parse error at line " + std::to_string(lineno) +
                               ": need at least 2 columns");
    if (width == 0) width = vals.size();
    if (vals.size() != width)
      throw std::runtime_error("dimension mismatch at line " +
                               std::to_string(lineno) + ": expected " +
                               std::to_string(width) + " columns, got " +
                               std::to_string(vals.size()));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error("load_sample: no records in " + path);

  Sample s;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(width - 1);
  s.x.resize(n, d);
  s.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) s.x(i, j) = rows[i][j];
    s.y[i] = rows[i][width - 1];
  }
  s.validate();
  return s;
}

}  // namespace enet
