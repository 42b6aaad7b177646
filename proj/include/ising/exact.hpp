#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ising/coupling.hpp"
#include "ising/meanfield.hpp"
#include "ising/spin_configuration.hpp"

namespace ising {

inline constexpr int kBruteForceCap = 24;
inline constexpr int kCurieWeissCap = 1'000'000;
inline constexpr std::size_t kBlockedStateCap = 10'000'000;
inline constexpr std::size_t kMaxBlocks = 3;

/// Exact law of the total magnetization S = sum_i sigma_i.
struct MagnetizationLaw {
  int n = 0;
  std::vector<int> support;         ///< -n, -n+2, ..., n
  std::vector<double> log_probs;    ///< kept separately so far tails do not underflow
  std::vector<double> probs;
  double log_z = 0;

  /// Normalizes unnormalized log-weights given on the full support
  /// (-n, ..., n); log_z becomes log sum exp(log_weights).
  static MagnetizationLaw from_log_weights(int n, std::vector<double> log_weights);

  double mean() const;
  /// Probability of S == s (0 off the support).
  double probability(int s) const;
};

double log_sum_exp(std::span<const double> values);
double log_binomial(int n, int k);

/// log of sum over {-1,1}^n of exp((beta/2) s'As + B sum s).
double partition_function_bruteforce(const CouplingMatrix& a, const ModelParams& p);

MagnetizationLaw magnetization_law_bruteforce(const CouplingMatrix& a, const ModelParams& p);

/// Gibbs probability of every configuration; bit i of the index set means
/// sigma_i = +1. For n <= 20.
std::vector<double> gibbs_probabilities(const CouplingMatrix& a, const ModelParams& p);

/// Curie-Weiss law through the sufficient statistic. log_z normalizes the
/// zero-diagonal coupling A = (J - I)/n, i.e. it equals
/// partition_function_bruteforce(build_complete(n, n), p).
MagnetizationLaw magnetization_law_cw(int n, const ModelParams& p);

/// Block-constant coupling: entry `within` between distinct sites of the
/// same block and `between` across blocks. At most three blocks.
MagnetizationLaw magnetization_law_blocked(const std::vector<int>& block_sizes, double within, double between,
                                           const ModelParams& p);

/// Binomial law of S when every spin is +1 with probability
/// e^{beta t + B} / (2 cosh(beta t + B)), independently. log_z is
/// n log(2 cosh(beta t + B)).
MagnetizationLaw iid_reference_law(int n, const ModelParams& p, double t);

/// E[sigma_i | rest] = tanh(beta m_i(sigma) + B).
double conditional_mean(const SpinConfiguration& sigma, int i, const ModelParams& p);

/// CSV with header `support,prob`.
void write_law_csv(std::ostream& out, const MagnetizationLaw& law);

}  // namespace ising
