#include "ising/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "ising/error.hpp"

namespace ising {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_bruteforce_size(int n) {
  if (n > kBruteForceCap)
    throw SizeLimitError("brute-force enumeration requested for n=" + std::to_string(n), kBruteForceCap);
}

// Gray-code walk over {-1,1}^n starting from all -1; calls
// visit(magnetization, energy) once per configuration where
// energy = (beta/2) s'As + B sum s.
template <typename Visit>
void enumerate(const CouplingMatrix& a, const ModelParams& p, Visit&& visit) {
  const int n = a.size();
  SpinConfiguration sigma = SpinConfiguration::constant(a, -1);
  double pair_sum = 0;
  for (const auto& e : a.upper_triplets()) pair_sum += e.value;
  double energy = p.beta * pair_sum - p.b_field * n;
  visit(sigma.magnetization(), energy);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int i = std::countr_zero(k);
    const int old = sigma.spin(i);
    energy -= 2.0 * old * (p.beta * sigma.local_field(i) + p.b_field);
    sigma.flip(i);
    visit(sigma.magnetization(), energy);
  }
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  long double acc = 0;
  for (double v : values) acc += std::exp(static_cast<long double>(v - m));
  return m + static_cast<double>(std::log(acc));
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return kNegInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

MagnetizationLaw MagnetizationLaw::from_log_weights(int n, std::vector<double> log_weights) {
  if (static_cast<int>(log_weights.size()) != n + 1) throw InvalidArgument("log_weights", "must have n + 1 entries");
  MagnetizationLaw law;
  law.n = n;
  law.log_z = log_sum_exp(log_weights);
  if (!std::isfinite(law.log_z)) throw InconsistencyError("law has no finite mass");
  law.support.resize(n + 1);
  law.log_probs.resize(n + 1);
  law.probs.resize(n + 1);
  for (int k = 0; k <= n; ++k) {
    law.support[k] = -n + 2 * k;
    law.log_probs[k] = log_weights[k] - law.log_z;
    law.probs[k] = std::exp(law.log_probs[k]);
  }
  return law;
}

double MagnetizationLaw::mean() const {
  double m = 0;
  for (std::size_t k = 0; k < support.size(); ++k) m += support[k] * probs[k];
  return m;
}

double MagnetizationLaw::probability(int s) const {
  if (s < -n || s > n || (s + n) % 2 != 0) return 0.0;
  return probs[static_cast<std::size_t>((s + n) / 2)];
}

MagnetizationLaw magnetization_law_bruteforce(const CouplingMatrix& a, const ModelParams& p) {
  validate(p);
  const int n = a.size();
  require_bruteforce_size(n);
  // First pass finds the largest energy per magnetization bucket so the
  // second pass accumulates shifted exponentials that never overflow.
  std::vector<double> peak(static_cast<std::size_t>(n) + 1, kNegInf);
  enumerate(a, p, [&](long long s, double e) {
    auto& m = peak[static_cast<std::size_t>((s + n) / 2)];
    m = std::max(m, e);
  });
  std::vector<long double> acc(static_cast<std::size_t>(n) + 1, 0.0L);
  enumerate(a, p, [&](long long s, double e) {
    const auto k = static_cast<std::size_t>((s + n) / 2);
    acc[k] += std::exp(static_cast<long double>(e - peak[k]));
  });
  std::vector<double> log_w(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) log_w[k] = peak[k] + static_cast<double>(std::log(acc[k]));
  return MagnetizationLaw::from_log_weights(n, std::move(log_w));
}

double partition_function_bruteforce(const CouplingMatrix& a, const ModelParams& p) {
  return magnetization_law_bruteforce(a, p).log_z;
}

std::vector<double> gibbs_probabilities(const CouplingMatrix& a, const ModelParams& p) {
  validate(p);
  const int n = a.size();
  if (n > 20) throw SizeLimitError("joint Gibbs table requested for n=" + std::to_string(n), 20);
  const std::size_t total = std::size_t{1} << n;
  std::vector<double> log_w(total);
  std::vector<int> spins(static_cast<std::size_t>(n));
  for (std::size_t idx = 0; idx < total; ++idx) {
    for (int i = 0; i < n; ++i) spins[i] = (idx >> i) & 1 ? 1 : -1;
    double e = 0;
    for (int i = 0; i < n; ++i) {
      const auto cols = a.row_indices(i);
      const auto vals = a.row_values(i);
      double m = 0;
      for (std::size_t k = 0; k < cols.size(); ++k) m += vals[k] * spins[cols[k]];
      e += 0.5 * p.beta * spins[i] * m + p.b_field * spins[i];
    }
    log_w[idx] = e;
  }
  const double lz = log_sum_exp(log_w);
  for (auto& v : log_w) v = std::exp(v - lz);
  return log_w;
}

MagnetizationLaw magnetization_law_cw(int n, const ModelParams& p) {
  validate(p);
  if (n < 1) throw InvalidArgument("n", "must be positive");
  if (n > kCurieWeissCap) throw SizeLimitError("Curie-Weiss law requested for n=" + std::to_string(n), kCurieWeissCap);
  std::vector<double> log_w(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double s = -n + 2.0 * k;
    log_w[k] = log_binomial(n, k) + p.beta / (2.0 * n) * (s * s - n) + p.b_field * s;
  }
  return MagnetizationLaw::from_log_weights(n, std::move(log_w));
}

MagnetizationLaw magnetization_law_blocked(const std::vector<int>& block_sizes, double within, double between,
                                           const ModelParams& p) {
  validate(p);
  if (block_sizes.empty() || block_sizes.size() > kMaxBlocks)
    throw InvalidArgument("block_sizes", "between 1 and 3 blocks are supported");
  if (!(within >= 0) || !(between >= 0)) throw InvalidArgument("within", "couplings must be nonnegative");
  std::size_t states = 1;
  int n = 0;
  for (int b : block_sizes) {
    if (b < 1) throw InvalidArgument("block_sizes", "block sizes must be positive");
    states *= static_cast<std::size_t>(b) + 1;
    if (states > kBlockedStateCap)
      throw SizeLimitError("blocked enumeration state space too large", kBlockedStateCap);
    n += b;
  }
  const std::size_t nb = block_sizes.size();

  // Per-block tables indexed by the number of +1 spins.
  std::vector<std::vector<double>> log_c(nb);
  for (std::size_t b = 0; b < nb; ++b)
    for (int k = 0; k <= block_sizes[b]; ++k) log_c[b].push_back(log_binomial(block_sizes[b], k));

  auto visit_all = [&](auto&& visit) {
    std::vector<int> up(nb, 0);
    for (;;) {
      double lw = 0;
      int total = 0;
      double self = 0, cross_sum = 0, cross_sq = 0;
      for (std::size_t b = 0; b < nb; ++b) {
        const int s = 2 * up[b] - block_sizes[b];
        lw += log_c[b][up[b]];
        total += s;
        self += static_cast<double>(s) * s - block_sizes[b];
        cross_sum += s;
        cross_sq += static_cast<double>(s) * s;
      }
      // sum_{b != c} s_b s_c = (sum s)^2 - sum s^2
      const double cross = cross_sum * cross_sum - cross_sq;
      lw += 0.5 * p.beta * (within * self + between * cross) + p.b_field * total;
      visit(static_cast<std::size_t>((total + n) / 2), lw);
      std::size_t b = 0;
      while (b < nb && ++up[b] > block_sizes[b]) up[b++] = 0;
      if (b == nb) break;
    }
  };

  std::vector<double> peak(static_cast<std::size_t>(n) + 1, kNegInf);
  visit_all([&](std::size_t k, double lw) { peak[k] = std::max(peak[k], lw); });
  std::vector<long double> acc(static_cast<std::size_t>(n) + 1, 0.0L);
  visit_all([&](std::size_t k, double lw) { acc[k] += std::exp(static_cast<long double>(lw - peak[k])); });
  std::vector<double> log_w(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) log_w[k] = peak[k] + static_cast<double>(std::log(acc[k]));
  return MagnetizationLaw::from_log_weights(n, std::move(log_w));
}

MagnetizationLaw iid_reference_law(int n, const ModelParams& p, double t) {
  validate(p);
  if (n < 1) throw InvalidArgument("n", "must be positive");
  if (n > kCurieWeissCap) throw SizeLimitError("reference law requested for n=" + std::to_string(n), kCurieWeissCap);
  const double h = p.beta * t + p.b_field;
  const double log_2cosh = std::abs(h) + std::log1p(std::exp(-2.0 * std::abs(h)));
  const double log_up = h - log_2cosh;
  const double log_down = -h - log_2cosh;
  std::vector<double> log_w(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) log_w[k] = log_binomial(n, k) + k * log_up + (n - k) * log_down;
  MagnetizationLaw law = MagnetizationLaw::from_log_weights(n, std::move(log_w));
  law.log_z = n * log_2cosh;
  return law;
}

double conditional_mean(const SpinConfiguration& sigma, int i, const ModelParams& p) {
  if (i < 0 || i >= sigma.size()) throw InvalidArgument("i", "site index out of range");
  return std::tanh(p.beta * sigma.local_field(i) + p.b_field);
}

void write_law_csv(std::ostream& out, const MagnetizationLaw& law) {
  out << "support,prob\n" << std::setprecision(17);
  for (std::size_t k = 0; k < law.support.size(); ++k) out << law.support[k] << ',' << law.probs[k] << '\n';
}

}  // namespace ising
