#include "ising/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ising/error.hpp"

namespace ising {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double centering_of(double sigma_bar, Statistic statistic, double t) {
  switch (statistic) {
    case Statistic::sqrtn_minus_t: return t;
    case Statistic::sqrtn_minus_m: return sigma_bar >= 0 ? t : -t;
    case Statistic::quarter_n: return 0.0;
  }
  return 0.0;
}

double scale_of(Statistic statistic, int n) {
  return statistic == Statistic::quarter_n ? std::pow(static_cast<double>(n), 0.25) : std::sqrt(static_cast<double>(n));
}

void check_statistic(Statistic statistic, double t) {
  if (statistic == Statistic::quarter_n && t != 0)
    throw InvalidArgument("statistic", "quarter_n centering requires t = 0 (critical point)");
}

}  // namespace

DiscreteLaw::DiscreteLaw(std::vector<double> points, std::vector<double> masses) {
  if (points.size() != masses.size()) throw InvalidArgument("masses", "length differs from points");
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  double total = 0;
  for (std::size_t idx : order) {
    const double m = masses[idx];
    if (!(m >= 0) || !std::isfinite(points[idx])) throw InvalidArgument("masses", "must be finite and nonnegative");
    if (m == 0) continue;
    if (!atoms_.empty() && atoms_.back() == points[idx])
      masses_.back() += m;
    else {
      atoms_.push_back(points[idx]);
      masses_.push_back(m);
    }
    total += m;
  }
  if (!(total > 0)) throw InvalidArgument("masses", "total mass must be positive");
  cumulative_.resize(masses_.size());
  double run = 0;
  for (std::size_t k = 0; k < masses_.size(); ++k) {
    masses_[k] /= total;
    run += masses_[k];
    cumulative_[k] = run;
  }
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

DiscreteLaw DiscreteLaw::empirical(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("sample", "must be nonempty");
  return DiscreteLaw(std::vector<double>(values.begin(), values.end()), std::vector<double>(values.size(), 1.0));
}

double DiscreteLaw::cdf(double x) const {
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
  if (it == atoms_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double DiscreteLaw::mean() const {
  double m = 0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) m += atoms_[k] * masses_[k];
  return m;
}

double DiscreteLaw::variance() const {
  const double m = mean();
  double v = 0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) v += (atoms_[k] - m) * (atoms_[k] - m) * masses_[k];
  return v;
}

std::string_view to_string(Statistic s) {
  switch (s) {
    case Statistic::sqrtn_minus_t: return "sqrtN_minus_t";
    case Statistic::sqrtn_minus_m: return "sqrtN_minus_M";
    case Statistic::quarter_n: return "quarterN";
  }
  return "?";
}

std::optional<Statistic> statistic_from_string(std::string_view name) {
  for (Statistic s : {Statistic::sqrtn_minus_t, Statistic::sqrtn_minus_m, Statistic::quarter_n})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

CenteredSample center(std::span<const double> sigma_bars, Statistic statistic, int n, double t) {
  check_statistic(statistic, t);
  if (n < 1) throw InvalidArgument("n", "must be positive");
  const double scale = scale_of(statistic, n);
  CenteredSample out{{}, statistic, n, t};
  out.values.reserve(sigma_bars.size());
  for (double sb : sigma_bars) out.values.push_back(scale * (sb - centering_of(sb, statistic, t)));
  return out;
}

DiscreteLaw center(const MagnetizationLaw& law, Statistic statistic, double t) {
  check_statistic(statistic, t);
  const double scale = scale_of(statistic, law.n);
  std::vector<double> points(law.support.size());
  for (std::size_t k = 0; k < law.support.size(); ++k) {
    const double sb = static_cast<double>(law.support[k]) / law.n;
    points[k] = scale * (sb - centering_of(sb, statistic, t));
  }
  return DiscreteLaw(std::move(points), law.probs);
}

double ks_distance(const DiscreteLaw& lhs, const LimitLaw& rhs) {
  if (lhs.empty()) throw InvalidArgument("lhs", "empty law");
  const auto atoms = lhs.atoms();
  const auto masses = lhs.masses();
  double before = 0, worst = 0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double g = rhs.cdf(atoms[k]);
    const double at = before + masses[k];
    worst = std::max({worst, std::abs(before - g), std::abs(std::min(at, 1.0) - g)});
    before = at;
  }
  return worst;
}

double ks_distance(const DiscreteLaw& lhs, const DiscreteLaw& rhs) {
  if (lhs.empty() || rhs.empty()) throw InvalidArgument("lhs", "empty law");
  double worst = 0;
  for (const auto* law : {&lhs, &rhs})
    for (double x : law->atoms()) worst = std::max(worst, std::abs(lhs.cdf(x) - rhs.cdf(x)));
  return worst;
}

double ks_distance(const CenteredSample& lhs, const LimitLaw& rhs) {
  if (lhs.values.empty()) throw InvalidArgument("sample", "must be nonempty");
  return ks_distance(DiscreteLaw::empirical(lhs.values), rhs);
}

double dkw_band(std::size_t count, double alpha) {
  if (count == 0 || !(alpha > 0 && alpha < 1)) throw InvalidArgument("alpha", "need count > 0 and alpha in (0,1)");
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(count)));
}

std::vector<ConcentrationPoint> concentration_curve(const MagnetizationLaw& law, double t,
                                                    std::span<const double> deltas) {
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0)) throw InvalidArgument("deltas", "must be positive");
    if (k > 0 && !(deltas[k] > deltas[k - 1])) throw InvalidArgument("deltas", "must be increasing");
  }
  std::vector<ConcentrationPoint> out;
  std::vector<double> terms;
  for (double delta : deltas) {
    terms.clear();
    for (std::size_t k = 0; k < law.support.size(); ++k) {
      const double sb = static_cast<double>(law.support[k]) / law.n;
      const double m = sb >= 0 ? t : -t;
      if (std::abs(sb - m) > delta) terms.push_back(law.log_probs[k]);
    }
    out.push_back({delta, terms.empty() ? -kInf : log_sum_exp(terms)});
  }
  return out;
}

double log_event_probability(const MagnetizationLaw& law, const ThresholdEvent& event) {
  std::vector<double> terms;
  for (std::size_t k = 0; k < law.support.size(); ++k) {
    const double sb = static_cast<double>(law.support[k]) / law.n;
    const bool in = event.side == ThresholdEvent::Side::above ? sb > event.level : sb < event.level;
    if (in) terms.push_back(law.log_probs[k]);
  }
  return terms.empty() ? -kInf : log_sum_exp(terms);
}

EventComparison event_comparison(const MagnetizationLaw& law_p, const MagnetizationLaw& law_ref,
                                 const ThresholdEvent& event) {
  if (law_p.n != law_ref.n) throw InvalidArgument("law_ref", "laws must share n");
  EventComparison out;
  out.log_p = log_event_probability(law_p, event);
  out.log_ref = log_event_probability(law_ref, event);
  if (out.log_ref == -kInf && out.log_p == -kInf)
    out.gap = 0.0;
  else if (out.log_ref == -kInf) {
    out.gap = kInf;
    out.reference_impossible = true;
  } else
    out.gap = out.log_p - out.log_ref;
  return out;
}

double counterexample_mu(const ModelParams& p, CounterexampleKind which) {
  const Regime regime = classify(p);
  const double t = regime.t;
  const double s = 1.0 - t * t;
  switch (which) {
    case CounterexampleKind::line_graph:
      if (regime.label == RegimeLabel::theta3)
        throw InvalidArgument("params", "line-graph shift is undefined at the critical point");
      return p.beta * t / (std::sqrt(2.0) * (1.0 - p.beta * s) * (2.0 - p.beta * s));
    case CounterexampleKind::regularity_a:
    case CounterexampleKind::regularity_b: {
      if (p.b_field == 0) throw InvalidArgument("params.B", "irregular-degree shifts require a nonzero field");
      const double base = p.beta * t * s / (1.0 - p.beta * s);
      return which == CounterexampleKind::regularity_b ? base : base + std::tanh(p.b_field) - t;
    }
  }
  return 0.0;
}

}  // namespace ising
