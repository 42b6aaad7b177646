#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "ising/coupling.hpp"
#include "ising/error.hpp"
#include "ising/exact.hpp"
#include "ising/random.hpp"
#include "ising/spin_configuration.hpp"

using namespace ising;

namespace {

// Direct oracle: loop over all 2^n configurations with a dense matrix.
double naive_log_z(const Eigen::MatrixXd& a, const ModelParams& p) {
  const int n = static_cast<int>(a.rows());
  double total = 0;
  for (unsigned x = 0; x < (1u << n); ++x) {
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = (x >> i) & 1 ? 1.0 : -1.0;
    total += std::exp(0.5 * p.beta * s.dot(a * s) + p.b_field * s.sum());
  }
  return std::log(total);
}

}  // namespace

TEST_SUITE("exact") {

TEST_CASE("two-site Curie-Weiss partition function in closed form") {
  for (ModelParams p : {ModelParams{0.7, 0.0}, ModelParams{1.3, 0.4}}) {
    const double b = p.beta, h = p.b_field;
    const double z = std::exp(b / 2 + 2 * h) + std::exp(b / 2 - 2 * h) + 2 * std::exp(-b / 2);
    CHECK(magnetization_law_cw(2, p).log_z == doctest::Approx(std::log(z)).epsilon(1e-14));
    CHECK(partition_function_bruteforce(build_complete(2, 2), p) == doctest::Approx(std::log(z)).epsilon(1e-14));
  }
}

TEST_CASE("brute force matches a naive dense oracle") {
  const std::vector mats{build_erdos_renyi(9, 0.5, 1), build_wigner(8, {WignerLaw::Kind::uniform, 1.0}, 2),
                         build_block_spin(10, 3, 1), build_line_graph_complete(4)};
  for (const auto& a : mats)
    for (ModelParams p : {ModelParams{0.5, 0.0}, ModelParams{1.7, -0.2}})
      CHECK(partition_function_bruteforce(a, p) == doctest::Approx(naive_log_z(a.dense(), p)).epsilon(1e-12));
}

TEST_CASE("Curie-Weiss sufficient statistic equals brute force on the complete graph") {
  for (int n : {1, 5, 12, 16}) {
    for (ModelParams p : {ModelParams{0.5, 0.0}, ModelParams{1.0, 0.0}, ModelParams{2.0, 0.0}, ModelParams{0.8, 0.3}}) {
      const auto cw = magnetization_law_cw(n, p);
      const auto bf = magnetization_law_bruteforce(build_complete(n, n), p);
      CHECK(cw.log_z == doctest::Approx(bf.log_z).epsilon(1e-12));
      REQUIRE(cw.support == bf.support);
      for (std::size_t k = 0; k < cw.probs.size(); ++k) CHECK(std::abs(cw.probs[k] - bf.probs[k]) < 1e-12);
    }
  }
}

TEST_CASE("blocked enumeration equals brute force") {
  SUBCASE("two blocks from the block spin builder") {
    const int n = 14;
    const double a = 3, b = 1;
    const double row = a * (n / 2 - 1) + b * (n / 2);
    const ModelParams p{1.2, 0.1};
    const auto blocked = magnetization_law_blocked({n / 2, n / 2}, a / row, b / row, p);
    const auto bf = magnetization_law_bruteforce(build_block_spin(n, a, b), p);
    CHECK(blocked.log_z == doctest::Approx(bf.log_z).epsilon(1e-12));
    for (std::size_t k = 0; k < bf.probs.size(); ++k) CHECK(std::abs(blocked.probs[k] - bf.probs[k]) < 1e-12);
  }
  SUBCASE("three unequal blocks") {
    const std::vector<int> sizes{3, 5, 4};
    const double within = 0.2, between = 0.05;
    std::vector<int> block;
    for (int k = 0; k < 3; ++k) block.insert(block.end(), sizes[k], k);
    std::vector<Triplet> entries;
    for (int i = 0; i < 12; ++i)
      for (int j = i + 1; j < 12; ++j) entries.push_back({i, j, block[i] == block[j] ? within : between});
    const CouplingMatrix a(12, entries, "three-block");
    const ModelParams p{2.0, -0.1};
    const auto blocked = magnetization_law_blocked(sizes, within, between, p);
    const auto bf = magnetization_law_bruteforce(a, p);
    CHECK(blocked.log_z == doctest::Approx(bf.log_z).epsilon(1e-12));
    for (std::size_t k = 0; k < bf.probs.size(); ++k) CHECK(std::abs(blocked.probs[k] - bf.probs[k]) < 1e-12);
  }
  SUBCASE("one block reduces to Curie-Weiss") {
    const ModelParams p{0.9, 0.2};
    const auto blocked = magnetization_law_blocked({40}, 1.0 / 40, 0.0, p);
    const auto cw = magnetization_law_cw(40, p);
    CHECK(blocked.log_z == doctest::Approx(cw.log_z).epsilon(1e-12));
  }
  SUBCASE("limits") {
    CHECK_THROWS_AS(magnetization_law_blocked({2, 2, 2, 2}, 0.1, 0.1, {1, 0}), InvalidArgument);
    CHECK_THROWS_AS(magnetization_law_blocked({5000, 5000}, 0.1, 0.1, {1, 0}), SizeLimitError);
  }
}

TEST_CASE("magnetization law is symmetric at zero field") {
  const auto law = magnetization_law_bruteforce(build_erdos_renyi(13, 0.4, 5), {1.4, 0.0});
  for (int s = -13; s <= 13; s += 2) CHECK(law.probability(s) == doctest::Approx(law.probability(-s)).epsilon(1e-12));
  CHECK(std::abs(law.mean()) < 1e-12);
  CHECK(law.probability(0) == 0.0);
}

TEST_CASE("Gibbs probabilities normalize and agree with the magnetization law") {
  const auto a = build_wigner(10, {WignerLaw::Kind::exponential, 1.0}, 4);
  const ModelParams p{1.1, 0.3};
  const auto probs = gibbs_probabilities(a, p);
  const auto law = magnetization_law_bruteforce(a, p);
  std::vector<double> by_s(11, 0.0);
  double total = 0;
  for (std::size_t x = 0; x < probs.size(); ++x) {
    total += probs[x];
    by_s[std::popcount(x)] += probs[x];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  for (int k = 0; k <= 10; ++k) CHECK(by_s[k] == doctest::Approx(law.probability(2 * k - 10)).epsilon(1e-10));
}

TEST_CASE("conditional mean matches ratios of Gibbs weights") {
  const auto a = build_erdos_renyi(8, 0.6, 9);
  const ModelParams p{1.5, -0.4};
  const auto probs = gibbs_probabilities(a, p);
  Rng rng = make_rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t x = uniform_index(rng, probs.size());
    std::vector<int> spins(8);
    for (int i = 0; i < 8; ++i) spins[i] = (x >> i) & 1 ? 1 : -1;
    const SpinConfiguration sigma(a, spins);
    const int i = static_cast<int>(uniform_index(rng, 8));
    const double up = probs[x | (std::size_t{1} << i)], down = probs[x & ~(std::size_t{1} << i)];
    CHECK(conditional_mean(sigma, i, p) == doctest::Approx((up - down) / (up + down)).epsilon(1e-12));
  }
}

TEST_CASE("i.i.d. reference law") {
  const ModelParams p{0.8, 0.3};
  const double t = solve_fixed_point(p);
  const int n = 50;
  const auto q = iid_reference_law(n, p, t);
  const double up = 0.5 * (1 + std::tanh(p.beta * t + p.b_field));
  double total = 0;
  for (double v : q.probs) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(q.mean() == doctest::Approx(n * (2 * up - 1)).epsilon(1e-12));
  // at the fixed point the reference mean is exactly n t
  CHECK(q.mean() == doctest::Approx(n * t).epsilon(1e-12));
  CHECK(q.log_z == doctest::Approx(n * std::log(2 * std::cosh(p.beta * t + p.b_field))).epsilon(1e-14));
  CHECK(q.probability(n) == doctest::Approx(std::pow(up, n)).epsilon(1e-10));
}

TEST_CASE("large Curie-Weiss laws stay finite and normalized") {
  for (ModelParams p : {ModelParams{2.0, 0.0}, ModelParams{0.5, 3.0}, ModelParams{1.0, 0.0}}) {
    const auto law = magnetization_law_cw(100000, p);
    double total = 0;
    for (double v : law.probs) {
      REQUIRE(std::isfinite(v));
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    for (double lp : law.log_probs) REQUIRE(!std::isnan(lp));
    CHECK(std::isfinite(law.log_z));
  }
}

TEST_CASE("size caps") {
  CHECK_THROWS_AS(partition_function_bruteforce(build_complete(25, 25), {1, 0}), SizeLimitError);
  CHECK_THROWS_AS(gibbs_probabilities(build_complete(21, 21), {1, 0}), SizeLimitError);
  CHECK_THROWS_AS(magnetization_law_cw(kCurieWeissCap + 1, {1, 0}), SizeLimitError);
  CHECK_THROWS_AS(magnetization_law_cw(0, {1, 0}), InvalidArgument);
}

TEST_CASE("log-space helpers") {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  const std::vector<double> with_inf{-inf, 0.0};
  CHECK(log_sum_exp(with_inf) == 0.0);
  const std::vector<double> all_inf{-inf, -inf};
  CHECK(log_sum_exp(all_inf) == -inf);
  for (int n : {1, 10, 500})
    for (int k : {0, n / 3, n})
      CHECK(log_binomial(n, k) ==
            doctest::Approx(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)).epsilon(1e-12));
  CHECK(log_binomial(5, 6) == -inf);
}

TEST_CASE("law CSV") {
  std::ostringstream out;
  write_law_csv(out, magnetization_law_cw(2, {1.0, 0.0}));
  const std::string text = out.str();
  CHECK(text.rfind("support,prob\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("spin configuration keeps local fields consistent") {
  const auto a = build_wigner(60, {WignerLaw::Kind::exponential, 1.0}, 8);
  auto sigma = SpinConfiguration::constant(a, 1);
  CHECK(sigma.magnetization() == 60);
  Rng rng = make_rng(3);
  for (int k = 0; k < 100000; ++k) sigma.flip(static_cast<int>(uniform_index(rng, 60)));
  CHECK(sigma.field_drift() < 1e-10);
  long long m = 0;
  for (int s : sigma.spins()) m += s;
  CHECK(sigma.magnetization() == m);
  for (int i = 0; i < 60; ++i) {
    double field = 0;
    for (int j = 0; j < 60; ++j) field += a.at(i, j) * sigma.spin(j);
    CHECK(sigma.local_field(i) == doctest::Approx(field).epsilon(1e-9));
  }
  sigma.refresh_fields();
  CHECK(sigma.field_drift() == 0.0);
  CHECK_THROWS_AS(SpinConfiguration(a, std::vector<int>(60, 0)), InvalidArgument);
  CHECK_THROWS_AS(SpinConfiguration(a, std::vector<int>(59, 1)), InvalidArgument);
}

}  // TEST_SUITE
