#pragma once

#include <string>

namespace ising {

/// Analytic limit of a centered magnetization statistic.
///
///  - gaussian:          N(0, tau)
///  - quartic_w:         density proportional to exp(-x^4/12)
///  - modified_w_tilde:  density proportional to exp(-x^4/12 - x^2/sqrt(2))
///
/// Every kind can be shifted by `mu` (the law of X + mu).
struct LimitLaw {
  enum class Kind { gaussian, quartic_w, modified_w_tilde };

  Kind kind = Kind::gaussian;
  double tau = 1.0;
  double mu = 0.0;

  static LimitLaw gaussian(double tau);
  static LimitLaw quartic_w();
  static LimitLaw modified_w_tilde();
  LimitLaw shifted(double shift) const;

  double cdf(double x) const;
  double density(double x) const;
  /// Integral of the unnormalized density (sqrt(2 pi tau) for gaussian).
  double normalizer() const;
  /// E[X^2] of the unshifted law.
  double second_moment() const;
  std::string describe() const;
};

/// CDF of the limit law at x; quartic kinds use adaptive Simpson to 1e-12.
inline double limit_cdf(const LimitLaw& law, double x) { return law.cdf(x); }

}  // namespace ising
