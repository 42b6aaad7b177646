#include <doctest.h>

#include <cmath>
#include <set>

#include "ising/analysis.hpp"
#include "ising/coupling.hpp"
#include "ising/error.hpp"
#include "ising/exact.hpp"
#include "ising/sampler.hpp"

using namespace ising;

TEST_SUITE("sampler") {

TEST_CASE("Glauber kernel is stochastic, reversible and Gibbs-stationary") {
  const std::vector mats{build_erdos_renyi(6, 0.6, 3), build_wigner(7, {WignerLaw::Kind::exponential, 1.0}, 1),
                         build_regular(8, 3, RegularKind::random_regular, 2)};
  for (const auto& a : mats)
    for (ModelParams p : {ModelParams{0.6, 0.0}, ModelParams{1.8, 0.2}}) {
      const Eigen::MatrixXd t = glauber_transition_matrix(a, p);
      const auto probs = gibbs_probabilities(a, p);
      const Eigen::Map<const Eigen::VectorXd> pi(probs.data(), static_cast<Eigen::Index>(probs.size()));
      CHECK((t.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
      CHECK((pi.transpose() * t - pi.transpose()).cwiseAbs().maxCoeff() < 1e-14);
      // (sigma, sigma') with sigma' one step from sigma is an exchangeable pair
      const Eigen::MatrixXd flow = pi.asDiagonal() * t;
      CHECK((flow - flow.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    }
  CHECK_THROWS_AS(glauber_transition_matrix(build_complete(13, 13), {1, 0}), SizeLimitError);
}

TEST_CASE("a strong field drives every updated site to +1") {
  const auto a = build_regular(100, 4, RegularKind::circulant, 0);
  SamplerConfig cfg;
  cfg.init = InitKind::all_minus;
  auto state = make_chain(a, cfg, 0);
  std::set<int> visited;
  for (int k = 0; k < 100; ++k) {
    const auto step = glauber_step({1.0, 50.0}, state);
    CHECK(step.new_spin == 1);
    visited.insert(step.site);
  }
  for (int i : visited) CHECK(state.config.spin(i) == 1);
  CHECK(state.config.magnetization() == 2 * static_cast<long long>(visited.size()) - 100);
}

TEST_CASE("initializations") {
  const auto a = build_regular(2000, 4, RegularKind::circulant, 0);
  SamplerConfig cfg;
  cfg.init = InitKind::all_plus;
  CHECK(make_chain(a, cfg, 0).config.magnetization() == 2000);
  cfg.init = InitKind::cold_at_t;
  CHECK(make_chain(a, cfg, 0, 0.6).config.sigma_bar() == doctest::Approx(0.6).epsilon(0.1));
  cfg.init = InitKind::random;
  CHECK(std::abs(make_chain(a, cfg, 0).config.sigma_bar()) < 0.1);
}

TEST_CASE("sampled magnetization matches the exact law") {
  const auto a = build_erdos_renyi(10, 0.5, 4);
  const ModelParams p{0.8, 0.2};
  SamplerConfig cfg;
  cfg.burn_in_sweeps = 100;
  cfg.thin_sweeps = 2;
  cfg.n_samples = 10000;
  cfg.n_chains = 4;
  cfg.threads = 4;
  cfg.master_seed = 31;
  const auto draws = sample_ising(a, p, cfg);
  const auto law = magnetization_law_bruteforce(a, p);
  std::vector<double> counts(11, 0.0);
  for (const auto& d : draws) counts[static_cast<std::size_t>(std::lround((d.sigma_bar * 10 + 10) / 2))] += 1;
  const double total = static_cast<double>(draws.size());
  for (int k = 0; k <= 10; ++k) {
    const double q = law.probability(2 * k - 10);
    const double se = std::sqrt(q * (1 - q) / total);
    // thinning leaves mild autocorrelation, so allow a slightly wider band
    CHECK(std::abs(counts[k] / total - q) < 5 * se + 1e-4);
  }
}

TEST_CASE("sampling is reproducible and independent of the thread count") {
  const auto a = build_erdos_renyi(40, 0.3, 5);
  const ModelParams p{1.2, 0.0};
  SamplerConfig cfg;
  cfg.burn_in_sweeps = 10;
  cfg.n_samples = 50;
  cfg.n_chains = 6;
  cfg.master_seed = 77;
  cfg.threads = 1;
  const auto serial = sample_ising(a, p, cfg);
  cfg.threads = 4;
  const auto parallel = sample_ising(a, p, cfg);
  REQUIRE(serial.size() == 300);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    CHECK(serial[k].chain == parallel[k].chain);
    CHECK(serial[k].draw == parallel[k].draw);
    CHECK(serial[k].sigma_bar == parallel[k].sigma_bar);
    CHECK(serial[k].m_sign == (serial[k].sigma_bar >= 0 ? 1 : -1));
  }
  cfg.master_seed = 78;
  const auto other = sample_ising(a, p, cfg);
  int differ = 0;
  for (std::size_t k = 0; k < serial.size(); ++k) differ += other[k].sigma_bar != serial[k].sigma_bar;
  CHECK(differ > 0);
}

TEST_CASE("sampler config validation") {
  const auto a = build_complete(4, 4);
  SamplerConfig cfg;
  cfg.n_samples = 0;
  CHECK_THROWS_AS(sample_ising(a, {1, 0}, cfg), InvalidArgument);
  cfg = {};
  cfg.thin_sweeps = 0;
  CHECK_THROWS_AS(sample_ising(a, {1, 0}, cfg), InvalidArgument);
  cfg = {};
  cfg.threads = 0;
  CHECK_THROWS_AS(sample_ising(a, {1, 0}, cfg), InvalidArgument);
  CHECK_THROWS_AS(sample_ising(a, {0, 0}, SamplerConfig{}), InvalidArgument);
}

TEST_CASE("Curie-Weiss auxiliary sampler reproduces the exact law") {
  for (auto [n, p] : {std::pair{200, ModelParams{1.5, 0.0}}, std::pair{1000, ModelParams{1.0, 0.0}},
                      std::pair{500, ModelParams{0.5, 0.3}}}) {
    SamplerConfig cfg;
    cfg.n_samples = 20000;
    cfg.master_seed = 12;
    const auto draws = sample_cw_auxiliary(n, p, cfg);
    const auto law = magnetization_law_cw(n, p);
    std::vector<double> points;
    for (int s : law.support) points.push_back(static_cast<double>(s) / n);
    const double ks = ks_distance(DiscreteLaw::empirical(draws), DiscreteLaw(points, law.probs));
    CHECK(ks < dkw_band(draws.size(), 1e-3));
    CHECK(CurieWeissMixture(n, p).cdf_error() < 1e-10);
  }
}

TEST_CASE("auxiliary mixing variable concentrates at the fixed points") {
  const ModelParams p{2.0, 0.0};
  const CurieWeissMixture mixture(20000, p);
  const double t = solve_fixed_point(p);
  Rng rng = make_rng(4);
  int near = 0;
  for (int k = 0; k < 2000; ++k) near += std::abs(std::abs(mixture.draw_w(rng)) - t) < 0.05;
  CHECK(near == 2000);
  CHECK(mixture.grid_lower() < -1.0);
  CHECK(mixture.grid_upper() > 1.0);
}

TEST_CASE("limit-law samplers") {
  for (const auto& law : {LimitLaw::gaussian(0.7), LimitLaw::quartic_w(), LimitLaw::modified_w_tilde(),
                          LimitLaw::quartic_w().shifted(0.4)}) {
    const auto xs = sample_limit_law(law, 20000, 9);
    CenteredSample cs{xs, Statistic::sqrtn_minus_t, 1, 0.0};
    CHECK(ks_distance(cs, law) < dkw_band(xs.size(), 1e-3));
  }
  CHECK(rejection_acceptance_rate(LimitLaw::Kind::quartic_w) == doctest::Approx(0.7893).epsilon(1e-3));
  CHECK(rejection_acceptance_rate(LimitLaw::Kind::modified_w_tilde) < 1.0);
  const auto base = sample_limit_law(LimitLaw::quartic_w(), 100, 3);
  const auto shifted = sample_limit_law(LimitLaw::quartic_w().shifted(1.5), 100, 3);
  for (std::size_t k = 0; k < base.size(); ++k) CHECK(shifted[k] == doctest::Approx(base[k] + 1.5).epsilon(1e-15));
}

}  // TEST_SUITE
