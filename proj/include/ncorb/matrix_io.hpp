#pragma once

#include <iosfwd>
#include <string>

#include "ncorb/linalg.hpp"

namespace ncorb {

/// Dense complex matrices as plain text: a "ncorb-matrix 1" header line, a
/// "rows cols" line, then one matrix row per line as re im pairs at full
/// round-trip precision.
void write_matrix(std::ostream& out, const Matrix& m);

/// Parses the format above; throws StructuralError naming what is wrong
/// (bad header, bad dimensions, short or malformed rows).
Matrix read_matrix(std::istream& in);

void save_matrix(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path);

}  // namespace ncorb
