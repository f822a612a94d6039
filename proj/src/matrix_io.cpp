#include "sketchcv/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sketchcv/error.hpp"

namespace sketchcv {

Matrix read_symmetric_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "missing dimension line");
  std::istringstream head(line);
  long long d = 0;
  std::string extra;
  if (!(head >> d) || (head >> extra) || d < 1) {
    throw Error(ErrorCode::Parse, "first line must hold a single positive dimension");
  }
  Matrix m(d, d);
  for (long long i = 0; i < d; ++i) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::Parse, "expected " + std::to_string(d) + " rows, got " + std::to_string(i));
    }
    std::istringstream row(line);
    for (long long j = 0; j < d; ++j) {
      if (!(row >> m(i, j)) || !std::isfinite(m(i, j))) {
        throw Error(ErrorCode::Parse, "row " + std::to_string(i) + ": bad or missing entry " + std::to_string(j));
      }
    }
    if (row >> extra) throw Error(ErrorCode::Parse, "row " + std::to_string(i) + " has more than d entries");
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw Error(ErrorCode::Parse, "trailing content after the last row");
    }
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) {
      const double scale = std::max(std::abs(m(i, j)), std::abs(m(j, i)));
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) {
        std::ostringstream os;
        os << "matrix not symmetric: m[" << i << "][" << j << "] = " << m(i, j) << " but m[" << j << "][" << i
           << "] = " << m(j, i);
        throw Error(ErrorCode::Parse, os.str());
      }
    }
  }
  return m;
}

Matrix read_symmetric_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_symmetric_matrix(in);
}

}  // namespace sketchcv
