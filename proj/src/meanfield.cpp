#include "ising/meanfield.hpp"

#include <cmath>

#include "ising/error.hpp"

namespace ising {

void validate(const ModelParams& p) {
  if (!std::isfinite(p.beta) || !(p.beta > 0)) throw InvalidArgument("params.beta", "must be positive and finite");
  if (!std::isfinite(p.b_field)) throw InvalidArgument("params.B", "must be finite");
}

std::string_view to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::theta11: return "Theta11";
    case RegimeLabel::theta12: return "Theta12";
    case RegimeLabel::theta2: return "Theta2";
    case RegimeLabel::theta3: return "Theta3";
  }
  return "?";
}

namespace {

RegimeLabel label_of(const ModelParams& p) {
  if (p.b_field != 0) return RegimeLabel::theta12;
  if (p.beta < 1) return RegimeLabel::theta11;
  if (p.beta > 1) return RegimeLabel::theta2;
  return RegimeLabel::theta3;
}

double phi(double x, double beta, double b) { return x - std::tanh(beta * x + b); }

// Positive root of phi for b >= 0 on a bracket where phi changes sign.
double bisect_positive_root(double beta, double b) {
  double lo = b > 0 ? 0.0 : 1e-15;
  double hi = 1.0 - 1e-15;
  if (phi(lo, beta, b) >= 0) return lo;
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phi(mid, beta, b) < 0 ? lo : hi) = mid;
  }
  double x = std::abs(phi(lo, beta, b)) <= std::abs(phi(hi, beta, b)) ? lo : hi;
  // A few Newton polishes; the bracket keeps them safe since phi' > 0 at the root.
  for (int it = 0; it < 3; ++it) {
    const double th = std::tanh(beta * x + b);
    const double d = 1.0 - beta * (1.0 - th * th);
    if (d <= 0) break;
    const double next = x - (x - th) / d;
    if (!(next > 0 && next < 1) || std::abs(phi(next, beta, b)) >= std::abs(phi(x, beta, b))) break;
    x = next;
  }
  return x;
}

}  // namespace

double solve_fixed_point(const ModelParams& p) {
  validate(p);
  switch (label_of(p)) {
    case RegimeLabel::theta11:
    case RegimeLabel::theta3: return 0.0;
    case RegimeLabel::theta2: return bisect_positive_root(p.beta, 0.0);
    case RegimeLabel::theta12:
      return p.b_field > 0 ? bisect_positive_root(p.beta, p.b_field) : -bisect_positive_root(p.beta, -p.b_field);
  }
  return 0.0;
}

double limit_variance(double beta, double t) {
  const double s = 1.0 - t * t;
  return s / (1.0 - beta * s);
}

Regime classify(const ModelParams& p) {
  validate(p);
  Regime r;
  r.label = label_of(p);
  r.t = solve_fixed_point(p);
  const double th = std::tanh(p.beta * r.t + p.b_field);
  r.phi_prime = 1.0 - p.beta * (1.0 - th * th);
  if (r.label != RegimeLabel::theta3) r.tau = limit_variance(p.beta, r.t);
  return r;
}

double binary_entropy(double x) {
  if (!(std::abs(x) <= 1)) throw InvalidArgument("x", "must lie in [-1, 1]");
  auto xlogx = [](double u) { return u > 0 ? u * std::log(u) : 0.0; };
  return xlogx((1 + x) / 2) + xlogx((1 - x) / 2);
}

double mean_field_prediction(int n, double sum_dev, const ModelParams& p) {
  const double t = solve_fixed_point(p);
  const double quad = p.beta * t * t / 2;
  return n * (quad + p.b_field * t - binary_entropy(t)) + quad * sum_dev;
}

double mean_field_prediction(const CouplingMatrix& a, const ModelParams& p) {
  double sum_dev = 0;
  for (int i = 0; i < a.size(); ++i) sum_dev += a.row_sum(i) - 1.0;
  return mean_field_prediction(a.size(), sum_dev, p);
}

double mean_field_gap(const CouplingMatrix& a, const ModelParams& p, double log_z) {
  const double gap = log_z - mean_field_prediction(a, p);
  if (gap < -1e-9)
    throw InconsistencyError("log Z is below the mean-field lower bound by " + std::to_string(-gap));
  return gap;
}

}  // namespace ising
