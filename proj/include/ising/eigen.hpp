#pragma once

#include "ising/coupling.hpp"

namespace ising {

enum class EigenMethod {
  automatic,  ///< dense below kDenseEigenCutoff, deflated Lanczos above
  dense,
  lanczos,
};

inline constexpr int kDenseEigenCutoff = 4096;

struct TopEigenvalues {
  double lambda1 = 0;
  double lambda2 = 0;
  /// Largest explicit residual ||A v - lambda v|| over the two Ritz pairs
  /// (zero for the dense path).
  double residual = 0;
  int matvecs = 0;
};

struct LanczosOptions {
  double tolerance = 1e-8;
  int max_matvecs = 100000;
  int max_basis = 400;
  std::uint64_t seed = 0x5eed;
};

/// Two largest (algebraic) eigenvalues. For n == 1 both equal the single
/// eigenvalue 0. Throws ConvergenceError if the iterative path fails.
TopEigenvalues top_two_eigenvalues(const CouplingMatrix& a, EigenMethod method = EigenMethod::automatic,
                                   const LanczosOptions& options = {});

/// Full ascending spectrum via dense symmetric tridiagonalization.
Eigen::VectorXd full_spectrum(const CouplingMatrix& a);

}  // namespace ising
