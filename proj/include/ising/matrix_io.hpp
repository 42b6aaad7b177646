#pragma once

#include <filesystem>
#include <iosfwd>

#include "ising/coupling.hpp"

namespace ising {

/// Text format:
///   ising-coupling v1 <n> <nnz>
///   i j value            (one line per stored upper-triangle entry, 0-based)
/// Values are written with 17 significant digits; symmetry is implied.
void write_matrix(std::ostream& out, const CouplingMatrix& a);
void write_matrix(const std::filesystem::path& path, const CouplingMatrix& a);

/// Rejects malformed headers, diagonal or negative entries, and a line
/// count that disagrees with the header.
CouplingMatrix read_matrix(std::istream& in, std::string label);
CouplingMatrix read_matrix(const std::filesystem::path& path);

}  // namespace ising
