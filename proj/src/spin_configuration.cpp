#include "ising/spin_configuration.hpp"

#include <algorithm>
#include <cmath>

#include "ising/error.hpp"

namespace ising {

SpinConfiguration::SpinConfiguration(const CouplingMatrix& a, std::vector<int> spins)
    : a_(&a), spins_(std::move(spins)), fields_(spins_.size(), 0.0) {
  if (static_cast<int>(spins_.size()) != a.size()) throw InvalidArgument("spins", "length differs from matrix size");
  for (int s : spins_) {
    if (s != 1 && s != -1) throw InvalidArgument("spins", "values must be -1 or +1");
    magnetization_ += s;
  }
  refresh_fields();
}

SpinConfiguration SpinConfiguration::constant(const CouplingMatrix& a, int value) {
  return SpinConfiguration(a, std::vector<int>(static_cast<std::size_t>(a.size()), value));
}

void SpinConfiguration::set(int i, int value) {
  if (i < 0 || i >= size()) throw InvalidArgument("i", "site index out of range");
  if (value != 1 && value != -1) throw InvalidArgument("value", "must be -1 or +1");
  const int delta = value - spins_[i];
  if (delta == 0) return;
  spins_[i] = value;
  magnetization_ += delta;
  const auto cols = a_->row_indices(i);
  const auto vals = a_->row_values(i);
  for (std::size_t k = 0; k < cols.size(); ++k) fields_[cols[k]] += delta * vals[k];
}

void SpinConfiguration::refresh_fields() {
  for (int i = 0; i < size(); ++i) {
    const auto cols = a_->row_indices(i);
    const auto vals = a_->row_values(i);
    double acc = 0;
    for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * spins_[cols[k]];
    fields_[i] = acc;
  }
}

double SpinConfiguration::field_drift() const {
  double worst = 0;
  for (int i = 0; i < size(); ++i) {
    const auto cols = a_->row_indices(i);
    const auto vals = a_->row_values(i);
    double acc = 0;
    for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * spins_[cols[k]];
    worst = std::max(worst, std::abs(acc - fields_[i]));
  }
  return worst;
}

}  // namespace ising
