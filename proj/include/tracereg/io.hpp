#pragma once

#include <string>
#include <vector>

#include "tracereg/types.hpp"

namespace tracereg {

/// Shortest representation that round-trips an IEEE double (printf %.17g
/// trimmed by the parser on read; 17 significant digits always suffice).
std::string format_double(double v);

/// Headerless CSV, one matrix row per line, comma-separated, full precision.
/// write/read round-trip to identical doubles.
void write_matrix_csv(const std::string& path, const Eigen::Ref<const Matrix>& m);
Matrix read_matrix_csv(const std::string& path);

/// Sparse binary observations: headerless CSV triplets "i,j,y" with 0-based
/// integer indices. Parse errors name the 1-based file row.
struct Triplets {
  std::vector<int> rows;
  std::vector<int> cols;
  Vector y;
};
Triplets read_triplets_csv(const std::string& path);
void write_triplets_csv(const std::string& path, const Triplets& t);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace tracereg
