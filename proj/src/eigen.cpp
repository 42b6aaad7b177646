#include "ising/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ising/error.hpp"
#include "ising/random.hpp"

namespace ising {

namespace {

using Vec = Eigen::VectorXd;

struct EigenPair {
  double value = 0;
  Vec vector;
  double residual = 0;
};

class DeflatedOperator {
 public:
  DeflatedOperator(const CouplingMatrix& a, const std::vector<Vec>& deflate) : a_(a), deflate_(deflate) {}

  void project(Vec& v) const {
    for (const auto& d : deflate_) v -= d.dot(v) * d;
  }

  Vec apply(const Vec& x, int& matvecs) const {
    Vec y(x.size());
    a_.multiply({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
    ++matvecs;
    project(y);
    return y;
  }

 private:
  const CouplingMatrix& a_;
  const std::vector<Vec>& deflate_;
};

double norm_bound(const CouplingMatrix& a) {
  double bound = 0;
  for (int i = 0; i < a.size(); ++i) bound = std::max(bound, a.row_sum(i));
  return std::max(bound, 1e-300);
}

// Largest eigenpair of P A P on the orthogonal complement of `deflate`,
// by Lanczos with full reorthogonalization and explicit restarts.
EigenPair largest_pair(const CouplingMatrix& a, const std::vector<Vec>& deflate, const LanczosOptions& opt,
                       Rng& rng, int& matvecs) {
  const int n = a.size();
  const DeflatedOperator op(a, deflate);
  const double scale = norm_bound(a);
  const int basis_cap = std::min(opt.max_basis, n - static_cast<int>(deflate.size()));

  Vec start(n);
  for (int i = 0; i < n; ++i) start[i] = standard_normal(rng);
  double last_residual = std::numeric_limits<double>::infinity();

  while (matvecs < opt.max_matvecs) {
    op.project(start);
    start.normalize();
    std::vector<Vec> q{start};
    std::vector<double> alpha, beta;
    EigenPair best;
    bool done = false;
    for (int j = 0; j < basis_cap && matvecs < opt.max_matvecs; ++j) {
      Vec w = op.apply(q[j], matvecs);
      alpha.push_back(q[j].dot(w));
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& qk : q) w -= qk.dot(w) * qk;
        op.project(w);
      }
      const double b = w.norm();
      const int m = j + 1;
      const bool invariant = b <= 1e-13 * scale;
      if (invariant || m == basis_cap || m % 5 == 0) {
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int k = 0; k < m; ++k) {
          t(k, k) = alpha[k];
          if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta[k];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Vec s = es.eigenvectors().col(m - 1);
        const double estimate = b * std::abs(s[m - 1]);
        if (invariant || estimate <= opt.tolerance * scale || m == basis_cap) {
          Vec v = Vec::Zero(n);
          for (int k = 0; k < m; ++k) v += s[k] * q[k];
          op.project(v);
          v.normalize();
          const Vec av = op.apply(v, matvecs);
          const double theta_v = v.dot(av);
          best = {theta_v, v, (av - theta_v * v).norm()};
          last_residual = best.residual;
          if (best.residual <= opt.tolerance * scale || invariant) return best;
          start = v;
          done = true;
          break;
        }
      }
      beta.push_back(b);
      q.push_back(w / b);
    }
    if (!done && q.size() == 1) break;
  }
  throw ConvergenceError("Lanczos iteration did not converge within " + std::to_string(opt.max_matvecs) +
                             " matrix-vector products",
                         last_residual);
}

}  // namespace

TopEigenvalues top_two_eigenvalues(const CouplingMatrix& a, EigenMethod method, const LanczosOptions& options) {
  const int n = a.size();
  TopEigenvalues out;
  if (n == 1) return out;
  if (method == EigenMethod::automatic) method = n <= kDenseEigenCutoff ? EigenMethod::dense : EigenMethod::lanczos;

  if (method == EigenMethod::dense || n <= 2) {
    const Eigen::VectorXd ev = full_spectrum(a);
    out.lambda1 = ev[n - 1];
    out.lambda2 = ev[n - 2];
    return out;
  }

  Rng rng = make_rng(options.seed);
  std::vector<Vec> deflate;
  int matvecs = 0;
  const EigenPair first = largest_pair(a, deflate, options, rng, matvecs);
  deflate.push_back(first.vector);
  const EigenPair second = largest_pair(a, deflate, options, rng, matvecs);
  out.lambda1 = first.value;
  out.lambda2 = second.value;
  if (out.lambda2 > out.lambda1) std::swap(out.lambda1, out.lambda2);
  out.residual = std::max(first.residual, second.residual);
  out.matvecs = matvecs;
  return out;
}

Eigen::VectorXd full_spectrum(const CouplingMatrix& a) {
  // Eigen's implicit QR occasionally stalls on very degenerate spectra (line
  // graphs of K_m hit this for many m). Shifting the diagonal leaves the
  // eigenvectors alone and moves the eigenvalues by a known constant, which is
  // enough to get it unstuck.
  const Eigen::MatrixXd dense = a.dense();
  const double scale = std::max(1.0, dense.cwiseAbs().rowwise().sum().maxCoeff());
  for (double shift : {0.0, 1.0, -1.0, 0.5, 2.0}) {
    Eigen::MatrixXd m = dense;
    m.diagonal().array() += shift * scale;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success) return es.eigenvalues().array() - shift * scale;
  }
  throw ConvergenceError("dense symmetric eigensolver failed", 0.0);
}

}  // namespace ising
