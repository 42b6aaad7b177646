#include "ising/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "ising/error.hpp"

namespace ising {

namespace {

constexpr int kFieldRefreshSweeps = 1000;

double prob_up(double h) { return 1.0 / (1.0 + std::exp(-2.0 * h)); }

int sign_of(double sigma_bar) { return sigma_bar >= 0 ? 1 : -1; }

}  // namespace

void validate(const SamplerConfig& cfg) {
  if (cfg.burn_in_sweeps < 0) throw InvalidArgument("sampler.burn_in_sweeps", "must be nonnegative");
  if (cfg.thin_sweeps < 1) throw InvalidArgument("sampler.thin_sweeps", "must be at least 1");
  if (cfg.n_samples < 1) throw InvalidArgument("sampler.n_samples", "must be positive");
  if (cfg.n_chains < 1) throw InvalidArgument("sampler.n_chains", "must be positive");
  if (cfg.threads < 1) throw InvalidArgument("sampler.threads", "must be positive");
}

ChainState make_chain(const CouplingMatrix& a, const SamplerConfig& cfg, int chain_index, double t) {
  Rng rng = make_rng(cfg.master_seed, static_cast<std::uint64_t>(chain_index));
  std::vector<int> spins(static_cast<std::size_t>(a.size()));
  for (auto& s : spins) {
    switch (cfg.init) {
      case InitKind::all_plus: s = 1; break;
      case InitKind::all_minus: s = -1; break;
      case InitKind::random: s = bernoulli(rng, 0.5) ? 1 : -1; break;
      case InitKind::cold_at_t: s = bernoulli(rng, 0.5 * (1.0 + t)) ? 1 : -1; break;
    }
  }
  return ChainState{SpinConfiguration(a, std::move(spins)), 0, std::move(rng)};
}

StepResult glauber_step(const ModelParams& p, ChainState& state) {
  auto& sigma = state.config;
  const int i = static_cast<int>(uniform_index(state.rng, static_cast<std::uint64_t>(sigma.size())));
  const int old = sigma.spin(i);
  const int next = bernoulli(state.rng, prob_up(p.beta * sigma.local_field(i) + p.b_field)) ? 1 : -1;
  sigma.set(i, next);
  return {i, old, next};
}

void glauber_sweep(const ModelParams& p, ChainState& state) {
  const int n = state.config.size();
  for (int k = 0; k < n; ++k) glauber_step(p, state);
  ++state.sweep_count;
  if (state.sweep_count % kFieldRefreshSweeps == 0) state.config.refresh_fields();
}

std::vector<Draw> sample_ising(const CouplingMatrix& a, const ModelParams& p, const SamplerConfig& cfg) {
  validate(p);
  validate(cfg);
  const double t = solve_fixed_point(p);
  std::vector<std::vector<Draw>> per_chain(static_cast<std::size_t>(cfg.n_chains));

  auto run_chain = [&](int c) {
    ChainState state = make_chain(a, cfg, c, t);
    for (int s = 0; s < cfg.burn_in_sweeps; ++s) glauber_sweep(p, state);
    auto& out = per_chain[c];
    out.reserve(static_cast<std::size_t>(cfg.n_samples));
    for (int d = 0; d < cfg.n_samples; ++d) {
      for (int s = 0; s < cfg.thin_sweeps; ++s) glauber_sweep(p, state);
      const double sb = state.config.sigma_bar();
      out.push_back({c, d, sb, sign_of(sb)});
    }
  };

  const int workers = std::min(cfg.threads, cfg.n_chains);
  if (workers <= 1) {
    for (int c = 0; c < cfg.n_chains; ++c) run_chain(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int c = next++; c < cfg.n_chains; c = next++) run_chain(c);
      });
  }

  std::vector<Draw> all;
  all.reserve(static_cast<std::size_t>(cfg.n_chains) * cfg.n_samples);
  for (auto& chain : per_chain) all.insert(all.end(), chain.begin(), chain.end());
  return all;
}

Eigen::MatrixXd glauber_transition_matrix(const CouplingMatrix& a, const ModelParams& p) {
  validate(p);
  const int n = a.size();
  if (n > 12) throw SizeLimitError("explicit transition matrix requested for n=" + std::to_string(n), 12);
  const std::size_t states = std::size_t{1} << n;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  std::vector<int> spins(static_cast<std::size_t>(n));
  for (std::size_t x = 0; x < states; ++x) {
    for (int i = 0; i < n; ++i) spins[i] = (x >> i) & 1 ? 1 : -1;
    const SpinConfiguration sigma(a, spins);
    for (int i = 0; i < n; ++i) {
      const double up = prob_up(p.beta * sigma.local_field(i) + p.b_field);
      const std::size_t plus = x | (std::size_t{1} << i);
      const std::size_t minus = x & ~(std::size_t{1} << i);
      t(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(plus)) += up / n;
      t(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(minus)) += (1.0 - up) / n;
    }
  }
  return t;
}

CurieWeissMixture::CurieWeissMixture(int n, const ModelParams& p) : n_(n), p_(p) {
  validate(p);
  if (n < 1) throw InvalidArgument("n", "must be positive");
  if (n > 1'000'000) throw SizeLimitError("auxiliary sampler requested for n=" + std::to_string(n), 1'000'000);
  const double spread = 10.0 / std::sqrt(n * p.beta);
  const double lo = -1.0 - spread, hi = 1.0 + spread;
  auto log_density = [&](double w) {
    const double x = p.beta * w + p.b_field;
    const double log_cosh = std::abs(x) + std::log1p(std::exp(-2.0 * std::abs(x))) - std::numbers::ln2;
    return -n * (p.beta * w * w / 2.0 - log_cosh);
  };

  // Simpson-integrated CDF on a uniform grid with `cells` cells (node values
  // only at cell boundaries are kept).
  auto tabulate = [&](std::size_t cells, std::vector<double>& grid, std::vector<double>& cdf, double& log_peak) {
    grid.resize(cells + 1);
    std::vector<double> ld(2 * cells + 1);
    const double h = (hi - lo) / (2.0 * cells);
    log_peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ld.size(); ++k) {
      ld[k] = log_density(lo + h * k);
      log_peak = std::max(log_peak, ld[k]);
    }
    cdf.assign(cells + 1, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      grid[c] = lo + 2.0 * h * c;
      const double f0 = std::exp(ld[2 * c] - log_peak), f1 = std::exp(ld[2 * c + 1] - log_peak),
                   f2 = std::exp(ld[2 * c + 2] - log_peak);
      cdf[c + 1] = cdf[c] + h / 3.0 * (f0 + 4.0 * f1 + f2);
    }
    grid[cells] = hi;
    const double total = cdf.back();
    // Mass beyond the grid: edge density times the Gaussian length scale.
    const double edge = (std::exp(ld.front() - log_peak) + std::exp(ld.back() - log_peak)) / std::sqrt(n * p.beta);
    if (edge / total > 1e-12)
      throw Error("auxiliary sampler grid does not cover the mixing density (missing mass " +
                  std::to_string(edge / total) + ")");
    for (auto& v : cdf) v /= total;
  };

  std::size_t cells = 4096;
  double peak = 0;
  tabulate(cells, grid_, cdf_, peak);
  for (;;) {
    std::vector<double> fine_grid, fine_cdf;
    tabulate(2 * cells, fine_grid, fine_cdf, peak);
    double err = 0;
    for (std::size_t c = 0; c <= cells; ++c) err = std::max(err, std::abs(cdf_[c] - fine_cdf[2 * c]));
    grid_ = std::move(fine_grid);
    cdf_ = std::move(fine_cdf);
    cells *= 2;
    cdf_error_ = err;
    if (err < 1e-10 || cells >= (std::size_t{1} << 23)) break;
  }
}

double CurieWeissMixture::draw_w(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), 1, cdf_.size() - 1);
  const double c0 = cdf_[k - 1], c1 = cdf_[k];
  const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
  return grid_[k - 1] + frac * (grid_[k] - grid_[k - 1]);
}

double CurieWeissMixture::draw(Rng& rng) const {
  const double w = draw_w(rng);
  const double up = 0.5 * (1.0 + std::tanh(p_.beta * w + p_.b_field));
  std::binomial_distribution<int> spins_up(n_, up);
  const int k = spins_up(rng);
  return static_cast<double>(2 * k - n_) / n_;
}

std::vector<double> sample_cw_auxiliary(int n, const ModelParams& p, const SamplerConfig& cfg) {
  validate(cfg);
  const CurieWeissMixture mixture(n, p);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(cfg.n_chains) * cfg.n_samples);
  for (int c = 0; c < cfg.n_chains; ++c) {
    Rng rng = make_rng(cfg.master_seed, static_cast<std::uint64_t>(c));
    for (int d = 0; d < cfg.n_samples; ++d) out.push_back(mixture.draw(rng));
  }
  return out;
}

double rejection_acceptance_rate(LimitLaw::Kind kind) {
  switch (kind) {
    case LimitLaw::Kind::gaussian: return 1.0;
    case LimitLaw::Kind::quartic_w:
      // envelope exp(-x^2/4) scaled by exp(3/16), the maximum of exp(-x^4/12 + x^2/4)
      return LimitLaw::quartic_w().normalizer() / (std::exp(3.0 / 16.0) * std::sqrt(4.0 * std::numbers::pi));
    case LimitLaw::Kind::modified_w_tilde:
      return LimitLaw::modified_w_tilde().normalizer() / std::sqrt(std::numbers::sqrt2 * std::numbers::pi);
  }
  return 0.0;
}

std::vector<double> sample_limit_law(const LimitLaw& law, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("count", "must be positive");
  Rng rng = make_rng(seed);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const double z = standard_normal(rng);
    switch (law.kind) {
      case LimitLaw::Kind::gaussian: out.push_back(std::sqrt(law.tau) * z + law.mu); break;
      case LimitLaw::Kind::quartic_w: {
        const double x = std::numbers::sqrt2 * z;
        const double x2 = x * x;
        if (uniform01(rng) < std::exp(-x2 * x2 / 12.0 + x2 / 4.0 - 3.0 / 16.0)) out.push_back(x + law.mu);
        break;
      }
      case LimitLaw::Kind::modified_w_tilde: {
        const double x = z / std::sqrt(std::numbers::sqrt2);
        const double x2 = x * x;
        if (uniform01(rng) < std::exp(-x2 * x2 / 12.0)) out.push_back(x + law.mu);
        break;
      }
    }
  }
  return out;
}

}  // namespace ising
