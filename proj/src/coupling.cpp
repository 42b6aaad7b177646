#include "ising/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ising/eigen.hpp"
#include "ising/error.hpp"
#include "ising/random.hpp"

namespace ising {

namespace {

std::string fmt_label(const std::string& head, std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os.precision(17);
  os << head;
  for (const auto& [k, v] : kv) os << ' ' << k << '=' << v;
  return os.str();
}

std::vector<Triplet> edges_to_triplets(const std::vector<std::pair<int, int>>& edges, double value) {
  std::vector<Triplet> out;
  out.reserve(edges.size());
  for (const auto& [u, v] : edges) out.push_back({u, v, value});
  return out;
}

void require(bool ok, const char* field, const std::string& reason) {
  if (!ok) throw InvalidArgument(field, reason);
}

void require_positive_size(int n) { require(n >= 1, "n", "must be a positive integer"); }

}  // namespace

CouplingMatrix::CouplingMatrix(int n, std::vector<Triplet> entries, std::string label,
                               std::optional<double> graph_divisor)
    : n_(n), label_(std::move(label)), graph_divisor_(graph_divisor) {
  require_positive_size(n);
  std::vector<Triplet> both;
  both.reserve(2 * entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
      throw InvalidArgument("entries", "index out of range");
    if (e.row == e.col) throw InvalidArgument("entries", "diagonal entries are not allowed");
    if (!std::isfinite(e.value) || e.value < 0)
      throw InvalidArgument("entries", "values must be finite and nonnegative");
    if (e.value == 0) continue;
    both.push_back(e);
    both.push_back({e.col, e.row, e.value});
  }
  std::sort(both.begin(), both.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  for (std::size_t k = 1; k < both.size(); ++k) {
    if (both[k].row == both[k - 1].row && both[k].col == both[k - 1].col)
      throw InvalidArgument("entries", "duplicate entry for pair (" + std::to_string(both[k].row) + ", " +
                                           std::to_string(both[k].col) + ")");
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  col_.reserve(both.size());
  val_.reserve(both.size());
  for (const auto& e : both) {
    ++offsets_[static_cast<std::size_t>(e.row) + 1];
    col_.push_back(e.col);
    val_.push_back(e.value);
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
}

CouplingMatrix CouplingMatrix::from_dense(const Eigen::MatrixXd& m, std::string label) {
  if (m.rows() != m.cols() || m.rows() < 1) throw InvalidArgument("matrix", "must be square and nonempty");
  const int n = static_cast<int>(m.rows());
  std::vector<Triplet> entries;
  for (int i = 0; i < n; ++i) {
    if (m(i, i) != 0) throw InvalidArgument("matrix", "diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (m(i, j) != m(j, i)) throw InvalidArgument("matrix", "must be symmetric");
      if (m(i, j) != 0) entries.push_back({i, j, m(i, j)});
    }
  }
  return CouplingMatrix(n, std::move(entries), std::move(label));
}

std::span<const int> CouplingMatrix::row_indices(int i) const {
  return {col_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const double> CouplingMatrix::row_values(int i) const {
  return {val_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

double CouplingMatrix::at(int i, int j) const {
  const auto cols = row_indices(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
}

double CouplingMatrix::row_sum(int i) const {
  const auto vals = row_values(i);
  return std::accumulate(vals.begin(), vals.end(), 0.0);
}

std::vector<Triplet> CouplingMatrix::upper_triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz_upper());
  for (int i = 0; i < n_; ++i) {
    const auto cols = row_indices(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      if (cols[k] > i) out.push_back({i, cols[k], vals[k]});
  }
  return out;
}

Eigen::MatrixXd CouplingMatrix::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    const auto cols = row_indices(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) m(i, cols[k]) = vals[k];
  }
  return m;
}

void CouplingMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n_; ++i) {
    double acc = 0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += val_[k] * x[col_[k]];
    y[i] = acc;
  }
}

CouplingMatrix CouplingMatrix::scaled(double factor, std::string label) const {
  if (!(factor > 0) || !std::isfinite(factor)) throw InvalidArgument("factor", "must be positive and finite");
  CouplingMatrix out = *this;
  for (auto& v : out.val_) v *= factor;
  out.label_ = std::move(label);
  if (graph_divisor_) out.graph_divisor_ = *graph_divisor_ / factor;
  return out;
}

namespace {

// Pairing model with per-pair rejection: random unmatched half-edges are
// joined unless they would form a loop or a repeated edge. A dead end
// (no admissible pair left) restarts the whole pairing.
std::vector<std::pair<int, int>> random_regular_edges(int n, int d, std::uint64_t seed) {
  constexpr int kMaxAttempts = 1000;
  Rng rng = make_rng(seed);
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    std::vector<int> points;
    points.reserve(static_cast<std::size_t>(n) * d);
    for (int v = 0; v < n; ++v)
      for (int k = 0; k < d; ++k) points.push_back(v);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    std::vector<std::pair<int, int>> edges;
    edges.reserve(points.size() / 2);

    auto admissible = [&](int u, int v) {
      return u != v && std::find(adj[u].begin(), adj[u].end(), v) == adj[u].end();
    };
    auto remove_point = [&](std::size_t k) {
      points[k] = points.back();
      points.pop_back();
    };

    bool dead_end = false;
    while (!points.empty() && !dead_end) {
      bool paired = false;
      for (int tries = 0; tries < 64 && !paired; ++tries) {
        const auto a = uniform_index(rng, points.size());
        const auto b = uniform_index(rng, points.size());
        if (a == b || !admissible(points[a], points[b])) continue;
        const int u = points[a], v = points[b];
        adj[u].push_back(v);
        adj[v].push_back(u);
        edges.emplace_back(std::min(u, v), std::max(u, v));
        remove_point(std::max(a, b));
        remove_point(std::min(a, b));
        paired = true;
      }
      if (paired) continue;
      // Random probing failed; check whether any admissible pair remains.
      dead_end = true;
      for (std::size_t a = 0; a < points.size() && dead_end; ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b)
          if (admissible(points[a], points[b])) {
            dead_end = false;
            break;
          }
    }
    if (!dead_end) return edges;
  }
  throw RetryExhausted("random regular pairing failed for n=" + std::to_string(n) + " d=" + std::to_string(d),
                       kMaxAttempts);
}

}  // namespace

CouplingMatrix build_regular(int n, int d, RegularKind kind, std::uint64_t seed) {
  require_positive_size(n);
  require(d >= 1, "d", "must be a positive integer");
  require(d < n, "d", "must be smaller than n");
  std::vector<std::pair<int, int>> edges;
  std::string name;
  switch (kind) {
    case RegularKind::complete:
      require(d == n - 1, "d", "complete graph requires d = n - 1");
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
      name = "complete";
      break;
    case RegularKind::circulant: {
      require(d % 2 == 0 || n % 2 == 0, "d", "odd degree circulant requires even n");
      for (int i = 0; i < n; ++i)
        for (int k = 1; k <= d / 2; ++k) {
          const int j = (i + k) % n;
          edges.emplace_back(std::min(i, j), std::max(i, j));
        }
      if (d % 2 == 1)
        for (int i = 0; i < n / 2; ++i) edges.emplace_back(i, i + n / 2);
      name = "circulant";
      break;
    }
    case RegularKind::bipartite_regular: {
      require(n % 2 == 0, "n", "bipartite regular graph requires even n");
      const int h = n / 2;
      require(d <= h, "d", "bipartite regular graph requires d <= n/2");
      for (int i = 0; i < h; ++i)
        for (int k = 0; k < d; ++k) edges.emplace_back(i, h + (i + k) % h);
      name = "bipartite_regular";
      break;
    }
    case RegularKind::random_regular:
      require(static_cast<long long>(n) * d % 2 == 0, "d", "n*d must be even for a d-regular graph");
      edges = random_regular_edges(n, d, seed);
      name = "random_regular";
      break;
  }
  return CouplingMatrix(n, edges_to_triplets(edges, 1.0 / d),
                        fmt_label(name, {{"n", n}, {"d", d}, {"seed", static_cast<double>(seed)}}),
                        static_cast<double>(d));
}

CouplingMatrix build_complete(int n, double divisor) {
  require_positive_size(n);
  require(divisor > 0 && std::isfinite(divisor), "divisor", "must be positive");
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) entries.push_back({i, j, 1.0 / divisor});
  return CouplingMatrix(n, std::move(entries), fmt_label("complete", {{"n", n}, {"divisor", divisor}}), divisor);
}

CouplingMatrix build_erdos_renyi(int n, double p, std::uint64_t seed) {
  require_positive_size(n);
  require(n >= 2, "n", "must be at least 2");
  require(p > 0 && p <= 1, "p", "must lie in (0, 1]");
  Rng rng = make_rng(seed);
  const double divisor = (n - 1) * p;
  std::vector<Triplet> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (bernoulli(rng, p)) entries.push_back({i, j, 1.0 / divisor});
  return CouplingMatrix(n, std::move(entries),
                        fmt_label("erdos_renyi", {{"n", n}, {"p", p}, {"seed", static_cast<double>(seed)}}),
                        divisor);
}

CouplingMatrix build_erdos_renyi_directed(int n, double p, std::uint64_t seed) {
  require_positive_size(n);
  require(n >= 2, "n", "must be at least 2");
  require(p > 0 && p <= 1, "p", "must lie in (0, 1]");
  Rng rng = make_rng(seed);
  const double unit = 1.0 / (2.0 * (n - 1) * p);
  std::vector<Triplet> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int arcs = static_cast<int>(bernoulli(rng, p)) + static_cast<int>(bernoulli(rng, p));
      if (arcs > 0) entries.push_back({i, j, arcs * unit});
    }
  return CouplingMatrix(
      n, std::move(entries),
      fmt_label("erdos_renyi_directed", {{"n", n}, {"p", p}, {"seed", static_cast<double>(seed)}}));
}

namespace {

CouplingMatrix scale_by_average_degree(int n, const std::vector<std::pair<int, int>>& edges,
                                       std::string label) {
  if (edges.empty()) throw InvalidArgument("graph", "sampled graph has no edges; cannot scale by degree");
  const double avg_degree = 2.0 * static_cast<double>(edges.size()) / n;
  return CouplingMatrix(n, edges_to_triplets(edges, 1.0 / avg_degree), std::move(label), avg_degree);
}

}  // namespace

CouplingMatrix build_sbm(const std::vector<int>& block_sizes, const std::vector<std::vector<double>>& prob,
                         std::uint64_t seed) {
  const std::size_t k = block_sizes.size();
  require(k >= 1, "block_sizes", "must be nonempty");
  require(prob.size() == k, "prob", "dimension does not match block_sizes");
  for (std::size_t a = 0; a < k; ++a) {
    require(prob[a].size() == k, "prob", "dimension does not match block_sizes");
    require(block_sizes[a] >= 1, "block_sizes", "block sizes must be positive");
    for (std::size_t b = 0; b < k; ++b) {
      require(prob[a][b] >= 0 && prob[a][b] <= 1, "prob", "entries must lie in [0, 1]");
      require(prob[a][b] == prob[b][a], "prob", "must be symmetric");
    }
  }
  std::vector<int> block_of;
  for (std::size_t a = 0; a < k; ++a) block_of.insert(block_of.end(), block_sizes[a], static_cast<int>(a));
  const int n = static_cast<int>(block_of.size());
  Rng rng = make_rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (bernoulli(rng, prob[block_of[i]][block_of[j]])) edges.emplace_back(i, j);

  const std::string label = fmt_label("sbm", {{"n", n}, {"blocks", static_cast<double>(k)},
                                              {"seed", static_cast<double>(seed)}});
  if (k == 2 && block_sizes[0] == block_sizes[1]) {
    const double divisor = n * (prob[0][0] + prob[0][1]) / 2.0;
    require(divisor > 0, "prob", "all probabilities are zero");
    return CouplingMatrix(n, edges_to_triplets(edges, 1.0 / divisor), label, divisor);
  }
  return scale_by_average_degree(n, edges, label);
}

CouplingMatrix build_graphon(int n, const std::vector<std::vector<double>>& grid, double gamma,
                             std::uint64_t seed) {
  require_positive_size(n);
  const std::size_t k = grid.size();
  require(k >= 1, "grid", "must be nonempty");
  require(gamma > 0 && gamma <= 1, "gamma", "must lie in (0, 1]");
  double a = 0;
  for (std::size_t r = 0; r < k; ++r) {
    require(grid[r].size() == k, "grid", "must be square");
    for (std::size_t c = 0; c < k; ++c) {
      require(grid[r][c] >= 0 && grid[r][c] <= 1, "grid", "values must lie in [0, 1]");
      require(grid[r][c] == grid[c][r], "grid", "must be symmetric");
      a += grid[r][c];
    }
  }
  a /= static_cast<double>(k * k);
  require(a > 0, "grid", "must have positive mass");
  Rng rng = make_rng(seed);
  std::vector<std::size_t> cell(static_cast<std::size_t>(n));
  for (auto& c : cell) c = std::min<std::size_t>(k - 1, static_cast<std::size_t>(uniform01(rng) * k));
  const double sparsity = std::pow(static_cast<double>(n), -gamma);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (bernoulli(rng, grid[cell[i]][cell[j]] * sparsity)) edges.emplace_back(i, j);
  const double divisor = n * a * sparsity;
  return CouplingMatrix(
      n, edges_to_triplets(edges, 1.0 / divisor),
      fmt_label("graphon", {{"n", n}, {"gamma", gamma}, {"cells", static_cast<double>(k)},
                            {"seed", static_cast<double>(seed)}}),
      divisor);
}

CouplingMatrix build_block_spin(int n, double a, double b) {
  require_positive_size(n);
  require(n % 2 == 0, "n", "must be even");
  require(a >= 0 && b >= 0, "a", "a and b must be nonnegative");
  require(a > 0 || b > 0, "a", "a and b must not both be zero");
  const int h = n / 2;
  const double row_sum = a * (h - 1) + b * h;
  require(row_sum > 0, "a", "rows have zero mass");
  std::vector<Triplet> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool same = (i < h) == (j < h);
      const double w = (same ? a : b) / row_sum;
      if (w > 0) entries.push_back({i, j, w});
    }
  return CouplingMatrix(n, std::move(entries), fmt_label("block_spin", {{"n", n}, {"a", a}, {"b", b}}));
}

CouplingMatrix build_wigner(int n, WignerLaw law, std::uint64_t seed) {
  require_positive_size(n);
  require(law.mean > 0, "mean", "must be positive");
  Rng rng = make_rng(seed);
  const double divisor = n * law.mean;
  std::vector<Triplet> entries;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double u = uniform01(rng);
      const double x = law.kind == WignerLaw::Kind::exponential ? -law.mean * std::log1p(-u) : 2.0 * law.mean * u;
      if (x > 0) entries.push_back({i, j, x / divisor});
    }
  const char* kind = law.kind == WignerLaw::Kind::exponential ? "wigner_exponential" : "wigner_uniform";
  return CouplingMatrix(n, std::move(entries),
                        fmt_label(kind, {{"n", n}, {"mean", law.mean}, {"seed", static_cast<double>(seed)}}));
}

CouplingMatrix build_line_graph_complete(int m) {
  require(m >= 4, "m", "must be at least 4");
  // Vertex (a, b), a < b, is edge ab of K_m.
  std::vector<std::pair<int, int>> vertex;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) vertex.emplace_back(a, b);
  const int n = static_cast<int>(vertex.size());
  const int degree = 2 * (m - 2);
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(n) * degree / 2);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) {
      const auto [a, b] = vertex[u];
      const auto [c, d] = vertex[v];
      if (a == c || a == d || b == c || b == d) entries.push_back({u, v, 1.0 / degree});
    }
  return CouplingMatrix(n, std::move(entries), fmt_label("line_graph_complete", {{"m", m}}),
                        static_cast<double>(degree));
}

CouplingMatrix build_disjoint_union(std::span<const CouplingMatrix> parts, bool rescale) {
  require(!parts.empty(), "parts", "must be nonempty");
  if (parts.size() == 1 && !rescale) return parts.front();
  int n = 0;
  double total_degree = 0;
  for (const auto& p : parts) {
    if (rescale) {
      require(p.graph_divisor().has_value(), "parts", "rescaling needs parts built from graphs");
      for (int i = 0; i < p.size(); ++i) total_degree += p.row_sum(i) * *p.graph_divisor();
    }
    n += p.size();
  }
  const double avg_degree = total_degree / n;
  if (rescale) require(avg_degree > 0, "parts", "union has no edges");
  std::vector<Triplet> entries;
  std::string label = "disjoint_union[";
  int offset = 0;
  for (const auto& p : parts) {
    const double factor = rescale ? *p.graph_divisor() / avg_degree : 1.0;
    for (const auto& t : p.upper_triplets()) entries.push_back({t.row + offset, t.col + offset, t.value * factor});
    label += (offset == 0 ? "" : "; ") + p.label();
    offset += p.size();
  }
  label += rescale ? "] rescaled" : "]";
  std::optional<double> divisor;
  if (rescale) divisor = avg_degree;
  return CouplingMatrix(n, std::move(entries), std::move(label), divisor);
}

MatrixDiagnostics diagnostics(const CouplingMatrix& a) {
  MatrixDiagnostics d;
  d.n = a.size();
  d.row_sums.resize(static_cast<std::size_t>(d.n));
  for (int i = 0; i < d.n; ++i) {
    double rs = 0, sq = 0;
    for (double v : a.row_values(i)) {
      rs += v;
      sq += v * v;
    }
    d.row_sums[i] = rs;
    d.frobenius_sq += sq;
    d.alpha = std::max(d.alpha, sq);
    const double dev = rs - 1.0;
    d.sum_dev += dev;
    d.sum_dev_sq += dev * dev;
    d.max_dev = std::max(d.max_dev, std::abs(dev));
  }
  const auto eig = top_two_eigenvalues(a);
  d.lambda1 = eig.lambda1;
  d.lambda2 = eig.lambda2;
  d.well_connected_ratio = d.lambda1 != 0 ? d.lambda2 / d.lambda1 : std::numeric_limits<double>::quiet_NaN();
  d.a4_stat = std::pow(static_cast<double>(d.n), 0.25) * d.max_dev;

  const double mean_row = (d.sum_dev + d.n) / d.n;
  const double slack = 1e-9 * std::max(1.0, std::abs(mean_row));
  if (d.lambda1 < mean_row - slack)
    throw InconsistencyError("lambda1 below the all-ones Rayleigh quotient: " + std::to_string(d.lambda1) +
                             " < " + std::to_string(mean_row));
  return d;
}

RateTerms rate_terms(const MatrixDiagnostics& diag, double t, int n) {
  if (!(t >= 0 && t < 1)) throw InvalidArgument("t", "must lie in [0, 1)");
  if (n < 1) throw InvalidArgument("n", "must be positive");
  const double nn = n;
  const double log_n = std::log(nn);
  const double abs_dev = std::abs(diag.sum_dev);
  RateTerms r;
  r.eta = diag.frobenius_sq + t * t * diag.sum_dev_sq;
  r.nonuniq = diag.frobenius_sq + diag.sum_dev_sq + abs_dev;
  r.epsilon = diag.frobenius_sq + abs_dev * abs_dev / nn + diag.sum_dev_sq / nn + log_n;
  r.r = std::sqrt(std::pow(log_n, 3) * diag.alpha) + log_n * diag.max_dev;
  r.delta = diag.sum_dev_sq + abs_dev * abs_dev / std::sqrt(nn);
  r.theta11 = 1.0 / std::sqrt(nn) + diag.frobenius_sq * std::sqrt(diag.alpha * log_n) / std::sqrt(nn) +
              (1.0 + std::sqrt(diag.frobenius_sq) * diag.alpha * log_n) * std::sqrt(diag.sum_dev_sq / nn);
  return r;
}

}  // namespace ising
