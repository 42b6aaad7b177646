#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ising/coupling.hpp"
#include "ising/limit_law.hpp"
#include "ising/meanfield.hpp"
#include "ising/random.hpp"
#include "ising/spin_configuration.hpp"

namespace ising {

enum class InitKind { all_plus, all_minus, random, cold_at_t };

struct SamplerConfig {
  int burn_in_sweeps = 200;  ///< one sweep = n single-site steps
  int thin_sweeps = 1;
  int n_samples = 1000;      ///< per chain
  int n_chains = 1;
  std::uint64_t master_seed = 0;
  InitKind init = InitKind::random;
  int threads = 1;
};

/// Throws InvalidArgument unless all counts are positive (burn-in may be 0).
void validate(const SamplerConfig& cfg);

struct ChainState {
  SpinConfiguration config;
  std::uint64_t sweep_count = 0;
  Rng rng;
};

/// Fresh chain `chain_index` with its own stream split from the master seed.
/// `t` is used only by InitKind::cold_at_t (spins i.i.d. with mean t).
ChainState make_chain(const CouplingMatrix& a, const SamplerConfig& cfg, int chain_index, double t = 0.0);

struct StepResult {
  int site;
  int old_spin;
  int new_spin;
};

/// One random-scan heat-bath update: a uniform site I is resampled to +1
/// with probability (1 + tanh(beta m_I + B)) / 2.
StepResult glauber_step(const ModelParams& p, ChainState& state);

/// n consecutive glauber_step calls; increments sweep_count.
void glauber_sweep(const ModelParams& p, ChainState& state);

struct Draw {
  int chain;
  int draw;
  double sigma_bar;
  int m_sign;  ///< sign of sigma_bar, with 0 mapped to +1
};

/// Runs cfg.n_chains independent chains (in parallel when cfg.threads > 1)
/// and returns their draws ordered by (chain, draw). Output is identical
/// for any thread count.
std::vector<Draw> sample_ising(const CouplingMatrix& a, const ModelParams& p, const SamplerConfig& cfg);

/// Explicit 2^n x 2^n transition matrix of glauber_step (n <= 12). Rows
/// index the current configuration with the bit convention of
/// gibbs_probabilities.
Eigen::MatrixXd glauber_transition_matrix(const CouplingMatrix& a, const ModelParams& p);

/// Exact Curie-Weiss sampler through the auxiliary-variable mixture: draw
/// W with density proportional to exp(-n f(w)),
/// f(w) = beta w^2 / 2 - log cosh(beta w + B), then n i.i.d. spins with
/// mean tanh(beta W + B).
class CurieWeissMixture {
 public:
  CurieWeissMixture(int n, const ModelParams& p);

  /// One draw of sigma_bar.
  double draw(Rng& rng) const;
  /// One draw of the mixing variable W.
  double draw_w(Rng& rng) const;

  double grid_lower() const { return grid_.front(); }
  double grid_upper() const { return grid_.back(); }
  std::size_t grid_points() const { return grid_.size(); }
  /// Discretization error estimate of the tabulated CDF.
  double cdf_error() const { return cdf_error_; }

 private:
  int n_;
  ModelParams p_;
  std::vector<double> grid_;
  std::vector<double> cdf_;
  double cdf_error_ = 0;
};

/// cfg.n_chains * cfg.n_samples draws of sigma_bar, chain c using stream c.
std::vector<double> sample_cw_auxiliary(int n, const ModelParams& p, const SamplerConfig& cfg);

/// i.i.d. draws from a limit law. Quartic kinds use rejection from a
/// Gaussian envelope; a shifted law reproduces the unshifted stream plus mu.
std::vector<double> sample_limit_law(const LimitLaw& law, int count, std::uint64_t seed);

/// Acceptance probability of the rejection step for a quartic kind.
double rejection_acceptance_rate(LimitLaw::Kind kind);

}  // namespace ising
