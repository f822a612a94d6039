#pragma once

#include <istream>
#include <string>

#include "sketchcv/efamily.hpp"

namespace sketchcv {

/// Plain-text square matrix: first line "d", then d rows of d whitespace-separated
/// decimals. Symmetry is checked (1e-12 relative) and the first offending pair is
/// named in the error. Throws Parse for malformed content, Io if the file cannot
/// be opened.
Matrix read_symmetric_matrix(std::istream& in);
Matrix read_symmetric_matrix_file(const std::string& path);

}  // namespace sketchcv
