#include "ising/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ising/error.hpp"
#include "ising/quadrature.hpp"

namespace ising {

namespace {

constexpr double kCutoff = 15.0;  // exp(-15^4/12) is far below double precision
constexpr double kTol = 1e-12;

double log_kernel(LimitLaw::Kind kind, double x) {
  const double x2 = x * x;
  if (kind == LimitLaw::Kind::quartic_w) return -x2 * x2 / 12.0;
  return -x2 * x2 / 12.0 - x2 / std::numbers::sqrt2;
}

double half_integral(LimitLaw::Kind kind, double upper, double power) {
  return adaptive_simpson([&](double x) { return std::pow(x, power) * std::exp(log_kernel(kind, x)); }, 0.0,
                          upper, kTol);
}

double cached_normalizer(LimitLaw::Kind kind) {
  static const double quartic = 2.0 * half_integral(LimitLaw::Kind::quartic_w, kCutoff, 0);
  static const double modified = 2.0 * half_integral(LimitLaw::Kind::modified_w_tilde, kCutoff, 0);
  return kind == LimitLaw::Kind::quartic_w ? quartic : modified;
}

}  // namespace

LimitLaw LimitLaw::gaussian(double tau) {
  if (!(tau > 0) || !std::isfinite(tau)) throw InvalidArgument("tau", "must be positive");
  return {Kind::gaussian, tau, 0.0};
}

LimitLaw LimitLaw::quartic_w() { return {Kind::quartic_w, 1.0, 0.0}; }
LimitLaw LimitLaw::modified_w_tilde() { return {Kind::modified_w_tilde, 1.0, 0.0}; }

LimitLaw LimitLaw::shifted(double shift) const {
  LimitLaw out = *this;
  out.mu += shift;
  return out;
}

double LimitLaw::normalizer() const {
  if (kind == Kind::gaussian) return std::sqrt(2.0 * std::numbers::pi * tau);
  return cached_normalizer(kind);
}

double LimitLaw::density(double x) const {
  const double y = x - mu;
  if (kind == Kind::gaussian) return std::exp(-y * y / (2.0 * tau)) / normalizer();
  return std::exp(log_kernel(kind, y)) / normalizer();
}

double LimitLaw::cdf(double x) const {
  const double y = x - mu;
  if (std::isnan(y)) return y;
  if (kind == Kind::gaussian) return 0.5 * std::erfc(-y / std::sqrt(2.0 * tau));
  if (y == 0) return 0.5;
  const double half = half_integral(kind, std::min(std::abs(y), kCutoff), 0) / normalizer();
  return std::clamp(y > 0 ? 0.5 + half : 0.5 - half, 0.0, 1.0);
}

double LimitLaw::second_moment() const {
  if (kind == Kind::gaussian) return tau;
  return 2.0 * half_integral(kind, kCutoff, 2) / normalizer();
}

std::string LimitLaw::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind) {
    case Kind::gaussian: os << "gaussian(tau=" << tau << ")"; break;
    case Kind::quartic_w: os << "quartic_w"; break;
    case Kind::modified_w_tilde: os << "modified_w_tilde"; break;
  }
  if (mu != 0) os << " shifted by " << mu;
  return os.str();
}

}  // namespace ising
