#include "ising/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ising/error.hpp"

namespace ising {

void write_matrix(std::ostream& out, const CouplingMatrix& a) {
  const auto entries = a.upper_triplets();
  out << "ising-coupling v1 " << a.size() << ' ' << entries.size() << '\n';
  out << std::setprecision(17);
  for (const auto& e : entries) out << e.row << ' ' << e.col << ' ' << e.value << '\n';
}

void write_matrix(const std::filesystem::path& path, const CouplingMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix(out, a);
}

CouplingMatrix read_matrix(std::istream& in, std::string label) {
  std::string header;
  if (!std::getline(in, header)) throw InvalidArgument("matrix_file", "empty input");
  std::istringstream hs(header);
  std::string magic, version;
  long long n = -1, nnz = -1;
  if (!(hs >> magic >> version >> n >> nnz) || magic != "ising-coupling" || version != "v1" || n < 1 || nnz < 0)
    throw InvalidArgument("matrix_file", "bad header, expected 'ising-coupling v1 <n> <nnz>'");
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  std::string line;
  long long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long i, j;
    double v;
    if (!(ls >> i >> j >> v)) throw InvalidArgument("matrix_file", "malformed entry on line " + std::to_string(line_no));
    if (i == j) throw InvalidArgument("matrix_file", "diagonal entry on line " + std::to_string(line_no));
    if (v < 0) throw InvalidArgument("matrix_file", "negative entry on line " + std::to_string(line_no));
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw InvalidArgument("matrix_file", "index out of range on line " + std::to_string(line_no));
    entries.push_back({static_cast<int>(i), static_cast<int>(j), v});
  }
  if (static_cast<long long>(entries.size()) != nnz)
    throw InvalidArgument("matrix_file", "header announces " + std::to_string(nnz) + " entries, found " +
                                             std::to_string(entries.size()));
  return CouplingMatrix(static_cast<int>(n), std::move(entries), std::move(label));
}

CouplingMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("matrix_file", "cannot open " + path.string());
  return read_matrix(in, "file:" + path.string());
}

}  // namespace ising
