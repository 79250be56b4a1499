#include "tracereg/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tracereg {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  out << content;
  if (!out) throw InvalidInput("write failed: " + path);
}

void write_matrix_csv(const std::string& path, const Eigen::Ref<const Matrix>& m) {
  std::ostringstream out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& path, Index row) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == s.c_str() || (end && *end != '\0') || errno == ERANGE)
    throw InvalidInput(path + ": malformed number '" + s + "' at row " +
                       std::to_string(row + 1));
  return v;
}

int parse_int(const std::string& s, const std::string& path, Index row) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == s.c_str() || (end && *end != '\0') || errno == ERANGE)
    throw InvalidInput(path + ": malformed integer '" + s + "' at row " +
                       std::to_string(row + 1));
  return static_cast<int>(v);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

Matrix read_matrix_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw InvalidInput(path + ": empty file");
  const auto first = split_csv_line(lines[0]);
  const Index cols = static_cast<Index>(first.size());
  Matrix m(static_cast<Index>(lines.size()), cols);
  for (Index i = 0; i < m.rows(); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (static_cast<Index>(fields.size()) != cols)
      throw InvalidInput(path + ": row " + std::to_string(i + 1) + " has " +
                         std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(cols));
    for (Index j = 0; j < cols; ++j) m(i, j) = parse_double(fields[j], path, i);
  }
  return m;
}

Triplets read_triplets_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw InvalidInput(path + ": empty file");
  Triplets t;
  t.y.resize(static_cast<Index>(lines.size()));
  t.rows.reserve(lines.size());
  t.cols.reserve(lines.size());
  for (Index i = 0; i < static_cast<Index>(lines.size()); ++i) {
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 3)
      throw InvalidInput(path + ": row " + std::to_string(i + 1) +
                         " must be 'i,j,y' (3 fields), got " +
                         std::to_string(fields.size()));
    t.rows.push_back(parse_int(fields[0], path, i));
    t.cols.push_back(parse_int(fields[1], path, i));
    t.y(i) = parse_double(fields[2], path, i);
  }
  return t;
}

void write_triplets_csv(const std::string& path, const Triplets& t) {
  require(t.rows.size() == t.cols.size() &&
              static_cast<Index>(t.rows.size()) == t.y.size(),
          "triplet components must have equal length");
  std::ostringstream out;
  for (size_t i = 0; i < t.rows.size(); ++i)
    out << t.rows[i] << ',' << t.cols[i] << ','
        << format_double(t.y(static_cast<Index>(i))) << '\n';
  write_text_file(path, out.str());
}

}  // namespace tracereg
