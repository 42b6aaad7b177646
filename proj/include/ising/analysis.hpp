#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ising/exact.hpp"
#include "ising/limit_law.hpp"
#include "ising/meanfield.hpp"

namespace ising {

/// Finite-support law on the real line: sorted distinct atoms with masses.
class DiscreteLaw {
 public:
  DiscreteLaw() = default;
  /// Sorts, merges equal points and drops zero masses. Masses must be
  /// nonnegative with positive total; they are normalized.
  DiscreteLaw(std::vector<double> points, std::vector<double> masses);

  /// Empirical law with mass 1/size at every value.
  static DiscreteLaw empirical(std::span<const double> values);

  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const double> masses() const noexcept { return masses_; }
  bool empty() const noexcept { return atoms_.empty(); }

  /// P(X <= x).
  double cdf(double x) const;
  double mean() const;
  double variance() const;

 private:
  std::vector<double> atoms_;
  std::vector<double> masses_;
  std::vector<double> cumulative_;
};

enum class Statistic {
  sqrtn_minus_t,  ///< sqrt(n) (sigma_bar - t)
  sqrtn_minus_m,  ///< sqrt(n) (sigma_bar - M(sigma)), M = t if sigma_bar >= 0 else -t
  quarter_n,      ///< n^(1/4) sigma_bar
};

std::string_view to_string(Statistic s);
std::optional<Statistic> statistic_from_string(std::string_view name);

struct CenteredSample {
  std::vector<double> values;
  Statistic statistic;
  int n;
  double t;
};

/// Applies the statistic to draws of sigma_bar. quarter_n requires t == 0.
CenteredSample center(std::span<const double> sigma_bars, Statistic statistic, int n, double t);

/// Law of the statistic under an exact magnetization law.
DiscreteLaw center(const MagnetizationLaw& law, Statistic statistic, double t);

/// sup_x |F(x) - G(x)|, checking both one-sided limits at every atom.
double ks_distance(const DiscreteLaw& lhs, const LimitLaw& rhs);
double ks_distance(const DiscreteLaw& lhs, const DiscreteLaw& rhs);
double ks_distance(const CenteredSample& lhs, const LimitLaw& rhs);

/// Half-width of the Dvoretzky-Kiefer-Wolfowitz band at confidence 1 - alpha.
double dkw_band(std::size_t count, double alpha);

struct ConcentrationPoint {
  double delta;
  double log_prob;  ///< log P(|sigma_bar - M(sigma)| > delta); -inf for an empty event
};

/// Deltas must be positive and increasing.
std::vector<ConcentrationPoint> concentration_curve(const MagnetizationLaw& law, double t,
                                                    std::span<const double> deltas);

struct ThresholdEvent {
  enum class Side { above, below };
  Side side;
  double level;  ///< on the sigma_bar scale; the event is sigma_bar > level or < level
};

struct EventComparison {
  double log_p;
  double log_ref;
  double gap;                       ///< log_p - log_ref; 0 when both are -inf
  bool reference_impossible = false;  ///< log_ref = -inf while log_p is finite (gap = +inf)
};

EventComparison event_comparison(const MagnetizationLaw& law_p, const MagnetizationLaw& law_ref,
                                 const ThresholdEvent& event);

/// log P(event) under an exact law.
double log_event_probability(const MagnetizationLaw& law, const ThresholdEvent& event);

enum class CounterexampleKind { line_graph, regularity_a, regularity_b };

/// Shift constants of the line-graph and irregular-degree counterexamples.
double counterexample_mu(const ModelParams& p, CounterexampleKind which);

}  // namespace ising
