#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ising/coupling.hpp"

namespace ising {

/// Spins in {-1, +1} together with the local fields m_i = sum_j A(i,j) s_j,
/// kept consistent on every flip. Holds a reference to the matrix, which
/// must outlive the configuration.
class SpinConfiguration {
 public:
  SpinConfiguration(const CouplingMatrix& a, std::vector<int> spins);

  /// All spins equal to `value` (+1 or -1).
  static SpinConfiguration constant(const CouplingMatrix& a, int value);

  int size() const noexcept { return static_cast<int>(spins_.size()); }
  int spin(int i) const { return spins_[i]; }
  double local_field(int i) const { return fields_[i]; }
  std::span<const int> spins() const noexcept { return spins_; }
  std::span<const double> local_fields() const noexcept { return fields_; }
  long long magnetization() const noexcept { return magnetization_; }
  double sigma_bar() const noexcept { return static_cast<double>(magnetization_) / size(); }
  const CouplingMatrix& matrix() const noexcept { return *a_; }

  /// Sets spin i; updates the fields of its neighbours in O(degree).
  void set(int i, int value);
  void flip(int i) { set(i, -spins_[i]); }

  /// Recomputes every local field from scratch (clears accumulated rounding).
  void refresh_fields();

  /// max_i |cached m_i - recomputed m_i|.
  double field_drift() const;

 private:
  const CouplingMatrix* a_;
  std::vector<int> spins_;
  std::vector<double> fields_;
  long long magnetization_ = 0;
};

}  // namespace ising
