#include <doctest.h>

#include <cmath>

#include "ising/coupling.hpp"
#include "ising/error.hpp"
#include "ising/exact.hpp"
#include "ising/meanfield.hpp"
#include "ising/random.hpp"

using namespace ising;

namespace {

// Independent oracle: plain bisection on the positive bracket, no Newton step.
double bisection_oracle(double beta, double b) {
  double lo = b > 0 ? 0.0 : 1e-12, hi = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (std::tanh(beta * mid + b) - mid > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("meanfield") {

TEST_CASE("regime classification") {
  CHECK(classify({0.5, 0.0}).label == RegimeLabel::theta11);
  CHECK(classify({0.5, 0.3}).label == RegimeLabel::theta12);
  CHECK(classify({2.0, -0.3}).label == RegimeLabel::theta12);
  CHECK(classify({2.0, 0.0}).label == RegimeLabel::theta2);
  CHECK(classify({1.0, 0.0}).label == RegimeLabel::theta3);
  CHECK(!classify({1.0, 0.0}).tau.has_value());
  // exact equality only: neighbours of the critical point are not critical
  CHECK(classify({std::nextafter(1.0, 2.0), 0.0}).label == RegimeLabel::theta2);
  CHECK(classify({std::nextafter(1.0, 0.0), 0.0}).label == RegimeLabel::theta11);
  CHECK(to_string(RegimeLabel::theta12) == "Theta12");
}

TEST_CASE("fixed point frozen values") {
  const double t2 = solve_fixed_point({2.0, 0.0});
  CHECK(t2 == doctest::Approx(0.9575040240772688).epsilon(1e-12));
  CHECK(limit_variance(2.0, t2) == doctest::Approx(0.0997879781298125).epsilon(1e-10));
  CHECK(solve_fixed_point({1.0, 0.1}) == doctest::Approx(0.611811554865302).epsilon(1e-12));
  CHECK(solve_fixed_point({0.5, 0.0}) == 0.0);
  CHECK(solve_fixed_point({1.0, 0.0}) == 0.0);
  CHECK(limit_variance(0.5, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("fixed point agrees with an independent bisection on a grid") {
  for (double beta : {0.1, 0.5, 0.9, 1.0, 1.1, 1.5, 3.0, 8.0}) {
    for (double b : {0.0, 0.01, 0.2, 1.0, 5.0, -0.2, -3.0}) {
      const ModelParams p{beta, b};
      const Regime r = classify(p);
      if (r.label == RegimeLabel::theta11 || r.label == RegimeLabel::theta3) {
        CHECK(r.t == 0.0);
        continue;
      }
      const double oracle = b >= 0 ? bisection_oracle(beta, b) : -bisection_oracle(beta, -b);
      CHECK(std::abs(r.t - oracle) < 1e-12);
      CHECK(std::abs(std::tanh(beta * r.t + b) - r.t) < 1e-14);
      if (b != 0) CHECK(r.t * b > 0);
      CHECK(r.phi_prime > 0);
      CHECK(r.tau.has_value());
      CHECK(*r.tau > 0);
    }
  }
}

TEST_CASE("fixed point agrees with damped iteration") {
  Rng rng = make_rng(99);
  for (int rep = 0; rep < 100; ++rep) {
    const double beta = 0.05 + 4.0 * uniform01(rng);
    const double b = 0.05 + 2.0 * uniform01(rng);
    double x = 1.0;
    for (int k = 0; k < 20000; ++k) x = 0.5 * x + 0.5 * std::tanh(beta * x + b);
    CHECK(std::abs(solve_fixed_point({beta, b}) - x) < 1e-10);
  }
}

TEST_CASE("fixed point is odd in the field") {
  for (double beta : {0.3, 1.0, 2.5})
    for (double b : {0.05, 0.7})
      CHECK(solve_fixed_point({beta, -b}) == doctest::Approx(-solve_fixed_point({beta, b})).epsilon(1e-15));
}

TEST_CASE("fixed point near the critical point scales like sqrt(3 (beta - 1))") {
  const double eps = 1e-6;
  const double t = solve_fixed_point({1.0 + eps, 0.0});
  CHECK(t / std::sqrt(3.0 * eps) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(validate(ModelParams{0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(ModelParams{-1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(ModelParams{1.0, NAN}), InvalidArgument);
  CHECK_THROWS_AS(solve_fixed_point({INFINITY, 0.0}), InvalidArgument);
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(-0.5623351446188084).epsilon(1e-14));
  CHECK(binary_entropy(0.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(-1.0) == 0.0);
  CHECK(binary_entropy(0.3) == doctest::Approx(binary_entropy(-0.3)).epsilon(1e-15));
  CHECK_THROWS_AS(binary_entropy(1.5), InvalidArgument);
}

TEST_CASE("mean-field prediction") {
  SUBCASE("regular matrix drops the row-sum correction") {
    const ModelParams p{0.7, 0.4};
    const double t = solve_fixed_point(p);
    const auto a = build_regular(20, 4, RegularKind::circulant, 0);
    const double expected = 20 * (0.7 * t * t / 2 + 0.4 * t - binary_entropy(t));
    CHECK(mean_field_prediction(a, p) == doctest::Approx(expected).epsilon(1e-13));
  }
  SUBCASE("row-sum correction enters linearly") {
    const ModelParams p{2.0, 0.0};
    const double t = solve_fixed_point(p);
    const double base = mean_field_prediction(50, 0.0, p);
    CHECK(mean_field_prediction(50, 3.0, p) - base == doctest::Approx(3.0 * t * t).epsilon(1e-12));
  }
  SUBCASE("high temperature at zero field predicts n log 2") {
    CHECK(mean_field_prediction(30, 0.7, {0.5, 0.0}) == doctest::Approx(30 * std::log(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("variational lower bound holds on small exact systems") {
  const std::vector mats{build_regular(12, 3, RegularKind::random_regular, 1), build_erdos_renyi(14, 0.4, 2),
                         build_wigner(12, {WignerLaw::Kind::exponential, 1.0}, 3), build_block_spin(12, 2, 1),
                         build_regular(10, 9, RegularKind::complete, 0)};
  for (const auto& a : mats)
    for (ModelParams p : {ModelParams{0.4, 0.0}, ModelParams{0.8, 0.5}, ModelParams{1.0, 0.0}, ModelParams{2.0, 0.0},
                          ModelParams{1.5, -0.3}}) {
      const double log_z = partition_function_bruteforce(a, p);
      CHECK(mean_field_gap(a, p, log_z) >= -1e-9);
    }
}

TEST_CASE("a gap below the variational bound is reported as an inconsistency") {
  const auto a = build_regular(8, 7, RegularKind::complete, 0);
  const ModelParams p{0.5, 0.2};
  CHECK_THROWS_AS(mean_field_gap(a, p, mean_field_prediction(a, p) - 1.0), InconsistencyError);
}

}  // TEST_SUITE
