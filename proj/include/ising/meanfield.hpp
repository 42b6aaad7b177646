#pragma once

#include <optional>
#include <string_view>

#include "ising/coupling.hpp"

namespace ising {

struct ModelParams {
  double beta = 0;     ///< inverse temperature, > 0
  double b_field = 0;  ///< external field B
};

/// Throws InvalidArgument unless beta > 0 and both values are finite.
void validate(const ModelParams& p);

enum class RegimeLabel { theta11, theta12, theta2, theta3 };

std::string_view to_string(RegimeLabel label);

struct Regime {
  RegimeLabel label;
  double t = 0;          ///< fixed point; the positive root in theta2
  double phi_prime = 0;  ///< 1 - beta (1 - tanh^2(beta t + B))
  std::optional<double> tau;  ///< limit variance, absent at the critical point
};

/// theta3 is detected by exact equality beta == 1 && B == 0; nearby inputs
/// are classified as theta2 / theta11.
Regime classify(const ModelParams& p);

/// Root of x = tanh(beta x + B): 0 in theta11/theta3, the root with the sign
/// of B in theta12, the positive root in theta2 (the negative one is -t).
double solve_fixed_point(const ModelParams& p);

/// (1 - t^2) / (1 - beta (1 - t^2)).
double limit_variance(double beta, double t);

/// I(x) = (1+x)/2 log((1+x)/2) + (1-x)/2 log((1-x)/2), with 0 log 0 = 0.
double binary_entropy(double x);

/// M_N = n (beta t^2/2 + B t - I(t)) + (beta t^2 / 2) sum_i (R_i - 1).
double mean_field_prediction(int n, double sum_dev, const ModelParams& p);
double mean_field_prediction(const CouplingMatrix& a, const ModelParams& p);

/// log_z - M_N. Throws InconsistencyError if the result is below -1e-9,
/// which would contradict the variational lower bound.
double mean_field_gap(const CouplingMatrix& a, const ModelParams& p, double log_z);

}  // namespace ising
