#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ising {

/// One stored entry of a coupling matrix.
struct Triplet {
  int row;
  int col;
  double value;
};

/// Symmetric, nonnegative, zero-diagonal interaction matrix A_N.
///
/// Storage is compressed sparse rows holding both triangles, sorted by
/// (row, col). Instances are immutable after construction and safe to
/// share across threads.
class CouplingMatrix {
 public:
  /// Builds from entries with row != col. Each unordered pair may appear at
  /// most once (in either orientation); the mirror entry is implied. Zero
  /// values are dropped. Throws InvalidArgument on diagonal, negative,
  /// non-finite, duplicate or out-of-range entries.
  ///
  /// `graph_divisor`, when present, records that the matrix is a 0/1
  /// adjacency divided by that number, so the unscaled graph can be
  /// recovered for rescaling.
  CouplingMatrix(int n, std::vector<Triplet> entries, std::string label,
                 std::optional<double> graph_divisor = std::nullopt);

  /// Throws InvalidArgument unless `m` is square, symmetric (exactly),
  /// nonnegative and zero on the diagonal.
  static CouplingMatrix from_dense(const Eigen::MatrixXd& m, std::string label);

  int size() const noexcept { return n_; }
  const std::string& label() const noexcept { return label_; }
  std::optional<double> graph_divisor() const noexcept { return graph_divisor_; }

  /// Column indices / values of row i (sorted by column).
  std::span<const int> row_indices(int i) const;
  std::span<const double> row_values(int i) const;

  double at(int i, int j) const;
  double row_sum(int i) const;

  /// Number of stored strictly-upper-triangle entries.
  std::size_t nnz_upper() const noexcept { return col_.size() / 2; }
  std::vector<Triplet> upper_triplets() const;

  Eigen::MatrixXd dense() const;

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;

  /// Same matrix with every entry multiplied by `factor` > 0.
  CouplingMatrix scaled(double factor, std::string label) const;

 private:
  CouplingMatrix() = default;

  int n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<int> col_;
  std::vector<double> val_;
  std::string label_;
  std::optional<double> graph_divisor_;
};

enum class RegularKind { random_regular, complete, circulant, bipartite_regular };

/// 0/1 adjacency of a d-regular simple graph divided by d.
CouplingMatrix build_regular(int n, int d, RegularKind kind, std::uint64_t seed);

/// K_n with every edge weight 1/divisor.
CouplingMatrix build_complete(int n, double divisor);

/// Symmetric G(n, p) divided by (n - 1) p.
CouplingMatrix build_erdos_renyi(int n, double p, std::uint64_t seed);

/// Directed G~(n, p) folded into the equivalent symmetric coupling
/// A(i,j) = (G~(i,j) + G~(j,i)) / (2 (n - 1) p).
CouplingMatrix build_erdos_renyi_directed(int n, double p, std::uint64_t seed);

/// Stochastic block model. Two equal blocks are divided by n (a + b) / 2;
/// every other layout is divided by the realized average degree.
CouplingMatrix build_sbm(const std::vector<int>& block_sizes,
                         const std::vector<std::vector<double>>& prob, std::uint64_t seed);

/// Sparse graphon sampled through a k x k step-function grid: latent
/// U_i ~ U(0,1) pick the grid cell, edges are Bernoulli(W / n^gamma), and
/// the result is divided by n * a * n^-gamma where a is the mean row
/// integral of the grid.
CouplingMatrix build_graphon(int n, const std::vector<std::vector<double>>& grid, double gamma,
                             std::uint64_t seed);

/// Entry a within each half, b across halves, divided by the row sum.
CouplingMatrix build_block_spin(int n, double a, double b);

struct WignerLaw {
  enum class Kind { exponential, uniform };
  Kind kind;
  double mean;  ///< exponential(mean) or uniform(0, 2 mean)
};

/// i.i.d. nonnegative off-diagonal entries divided by n * mean.
CouplingMatrix build_wigner(int n, WignerLaw law, std::uint64_t seed);

/// Line graph of K_m divided by its degree 2(m - 2).
CouplingMatrix build_line_graph_complete(int m);

/// Block-diagonal concatenation. With `rescale`, every part must carry a
/// graph divisor; the unscaled adjacencies are then divided by the global
/// average degree instead.
CouplingMatrix build_disjoint_union(std::span<const CouplingMatrix> parts, bool rescale);

struct MatrixDiagnostics {
  int n = 0;
  std::vector<double> row_sums;
  double frobenius_sq = 0;
  double lambda1 = 0;
  double lambda2 = 0;
  double alpha = 0;
  double sum_dev = 0;
  double sum_dev_sq = 0;
  double max_dev = 0;
  double well_connected_ratio = 0;
  double a4_stat = 0;
};

MatrixDiagnostics diagnostics(const CouplingMatrix& a);

/// Right-hand sides of the fluctuation and partition-function bounds, up to
/// their unspecified constants.
struct RateTerms {
  double eta = 0;       ///< ||A||_F^2 + t^2 sum (R_i - 1)^2
  double nonuniq = 0;   ///< ||A||_F^2 + sum (R_i - 1)^2 + |sum (R_i - 1)|
  double epsilon = 0;   ///< critical-point epsilon_N
  double r = 0;         ///< critical-point r_N
  double delta = 0;     ///< sum (R_i - 1)^2 + [sum (R_i - 1)]^2 / sqrt(n)
  double theta11 = 0;   ///< zero-field high-temperature bound
};

RateTerms rate_terms(const MatrixDiagnostics& diag, double t, int n);

}  // namespace ising
