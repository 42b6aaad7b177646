#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ising/analysis.hpp"
#include "ising/error.hpp"
#include "ising/matrix_io.hpp"
#include "ising_cli.hpp"

namespace ising::cli {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// Collects output files and acceptance verdicts for one experiment.
class Run {
 public:
  Run(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& out)
      : cfg_(cfg), base_(options.base_dir), out_(out) {
    std::filesystem::create_directories(cfg.output_dir);
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(cfg_.output_dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (cfg_.output_dir / name).string());
    f << content;
    files_.push_back({{"path", name}, {"bytes", content.size()}, {"fnv1a", hex64(fnv1a(content))}});
  }

  void check(const std::string& name, bool ok, const std::string& detail, bool gating = true) {
    const char* tag = ok ? "PASS" : (gating ? "FAIL" : "WARN");
    out_ << tag << ' ' << cfg_.name << '.' << name << ": " << detail << '\n';
    checks_.push_back({{"check", name}, {"result", tag}, {"detail", detail}});
    if (!ok && gating) failed_ = true;
  }

  void note(const std::string& line) { out_ << cfg_.name << ": " << line << '\n'; }

  int finish() {
    Json manifest{{"tool", kToolName},
                  {"version", kToolVersion},
                  {"config_hash", hex64(fnv1a(cfg_.resolved.dump()))},
                  {"config", cfg_.resolved},
                  {"files", files_},
                  {"checks", checks_}};
    const std::string text = manifest.dump(2) + "\n";
    std::ofstream f(cfg_.output_dir / "manifest.json", std::ios::binary);
    f << text;
    out_.flush();
    return failed_ ? kAcceptanceFail : kSuccess;
  }

  double threshold(const std::string& key) const { return cfg_.acceptance.at(key).get<double>(); }
  bool has(const std::string& key) const { return cfg_.acceptance.contains(key); }
  const std::filesystem::path& base() const { return base_; }

 private:
  const ExperimentConfig& cfg_;
  std::filesystem::path base_;
  std::ostream& out_;
  Json files_ = Json::array();
  Json checks_ = Json::array();
  bool failed_ = false;
};

Json json_array_of(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

LimitLaw limit_from(const ExperimentConfig& cfg) {
  const std::string name = cfg.analysis.value("limit", "gaussian");
  LimitLaw law;
  if (name == "gaussian") {
    const Regime regime = classify(cfg.params);
    if (!regime.tau) throw InvalidArgument("analysis.limit", "the gaussian limit is undefined at the critical point");
    law = LimitLaw::gaussian(*regime.tau);
  } else if (name == "quartic_w") {
    law = LimitLaw::quartic_w();
  } else {
    law = LimitLaw::modified_w_tilde();
  }
  return law.shifted(cfg.analysis.value("shift", 0.0));
}

Statistic statistic_from(const ExperimentConfig& cfg) {
  return *statistic_from_string(cfg.analysis.value("statistic", std::string("sqrtN_minus_t")));
}

std::vector<int> sizes_of(const ExperimentConfig& cfg) {
  if (!cfg.coupling.contains("n"))
    throw InvalidArgument("coupling", "size sweeps need an ensemble indexed by n");
  return cfg.analysis.at("sizes").get<std::vector<int>>();
}

DiscreteLaw centered_law(const MagnetizationLaw& law, Statistic s, double t) {
  try {
    return center(law, s, t);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("analysis.statistic", "does not match the regime (quarterN needs the critical point)");
  }
}

int rate(const ExperimentConfig& cfg, Run& run) {
  const Statistic stat = statistic_from(cfg);
  const LimitLaw limit = limit_from(cfg);
  const Regime regime = classify(cfg.params);
  const auto sizes = sizes_of(cfg);
  std::ostringstream csv;
  csv << "n,ks,ks_times_sqrt_n\n";
  Json reports = Json::array();
  std::vector<double> ks, scaled, log_scaled;
  double fitted = 0;
  for (int n : sizes) {
    const auto start = std::chrono::steady_clock::now();
    const auto law = exact_law(with_size(cfg.coupling, n), cfg.params, run.base());
    const double d = ks_distance(centered_law(law, stat, regime.t), limit);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const double sq = std::sqrt(static_cast<double>(n));
    const double rhs = stat == Statistic::quarter_n ? std::log(static_cast<double>(n)) / sq : 1.0 / sq;
    if (ks.empty()) fitted = d / rhs;
    ks.push_back(d);
    scaled.push_back(d * sq);
    log_scaled.push_back(d * sq / std::log(static_cast<double>(n)));
    csv << n << ',' << fmt(d) << ',' << fmt(d * sq) << '\n';
    reports.push_back({{"statistic", to_string(stat)},
                       {"n", n},
                       {"regime", to_string(regime.label)},
                       {"ks", d},
                       {"rate_rhs", rhs},
                       {"fitted_constant", fitted},
                       {"runtime_ms", std::round(ms)}});
    run.note("n=" + std::to_string(n) + " ks=" + fmt(d) + " ks*sqrt(n)=" + fmt(d * sq));
  }
  run.write("rate.csv", csv.str());
  run.write("analysis.json", reports.dump(2) + "\n");

  if (run.has("constant_band")) {
    double worst = 0;
    for (double c : scaled) worst = std::max(worst, std::abs(c / scaled.front() - 1.0));
    run.check("constant_band", worst <= run.threshold("constant_band"),
              "max |c_n/c_first - 1| = " + fmt(worst) + " (limit " + fmt(run.threshold("constant_band")) + ")");
  }
  if (run.has("strictly_decreasing") && cfg.acceptance.at("strictly_decreasing").get<bool>()) {
    bool ok = true;
    for (std::size_t k = 1; k < ks.size(); ++k) ok = ok && ks[k] < ks[k - 1];
    run.check("strictly_decreasing", ok, "ks = " + json_array_of(ks).dump());
  }
  if (run.has("log_rate_factor")) {
    const auto [lo, hi] = std::minmax_element(log_scaled.begin(), log_scaled.end());
    const double spread = *hi / *lo;
    run.check("log_rate_factor", spread <= run.threshold("log_rate_factor"),
              "max/min of ks*sqrt(n)/log(n) = " + fmt(spread) + " (limit " + fmt(run.threshold("log_rate_factor")) +
                  ")");
  }
  return 0;
}

int disjoint_limit(const ExperimentConfig& cfg, Run& run) {
  const auto law = exact_law(cfg.coupling, cfg.params, run.base());
  const double t = solve_fixed_point(cfg.params);
  if (!(t > 0)) throw InvalidArgument("params.beta", "the disjoint-block limit needs a low-temperature block (t > 0)");
  double center = 0, above = 0, below = 0;
  for (std::size_t k = 0; k < law.support.size(); ++k) {
    const double sb = static_cast<double>(law.support[k]) / law.n;
    if (std::abs(sb) < t / 2) center += law.probs[k];
    else if (sb > t / 2) above += law.probs[k];
    else if (sb < -t / 2) below += law.probs[k];
  }
  std::ostringstream csv;
  csv << "region,mass,target\n"
      << "center," << fmt(center) << ",0.5\n"
      << "above," << fmt(above) << ",0.25\n"
      << "below," << fmt(below) << ",0.25\n";
  run.write("masses.csv", csv.str());
  run.note("t=" + fmt(t) + " masses center=" + fmt(center) + " above=" + fmt(above) + " below=" + fmt(below));
  if (run.has("mass_tolerance")) {
    const double tol = run.threshold("mass_tolerance");
    const double worst = std::max({std::abs(center - 0.5), std::abs(above - 0.25), std::abs(below - 0.25)});
    run.check("mass_tolerance", worst <= tol, "max mass error " + fmt(worst) + " (limit " + fmt(tol) + ")");
  }
  return 0;
}

int meanfield_gap(const ExperimentConfig& cfg, Run& run) {
  std::ostringstream csv;
  csv << "instance,n,beta,B,log_z,prediction,gap\n";
  std::vector<double> sweep_gaps, all_gaps;
  auto one = [&](const std::string& name, const Json& spec, const ModelParams& p) {
    const CouplingMatrix a = build_coupling(spec, "coupling", run.base());
    const double log_z = exact_law(spec, p, run.base()).log_z;
    const double pred = mean_field_prediction(a, p);
    const double gap = log_z - pred;
    csv << name << ',' << a.size() << ',' << fmt(p.beta) << ',' << fmt(p.b_field) << ',' << fmt(log_z) << ','
        << fmt(pred) << ',' << fmt(gap) << '\n';
    all_gaps.push_back(gap);
    return gap;
  };
  if (cfg.analysis.contains("sizes"))
    for (int n : sizes_of(cfg))
      sweep_gaps.push_back(one("sweep_n" + std::to_string(n), with_size(cfg.coupling, n), cfg.params));
  else
    sweep_gaps.push_back(one("base", cfg.coupling, cfg.params));
  if (cfg.analysis.contains("extra")) {
    int k = 0;
    for (const auto& item : cfg.analysis.at("extra")) {
      const ModelParams p{item.at("params").at("beta").get<double>(), item.at("params").value("B", 0.0)};
      one("extra" + std::to_string(k++), item.at("coupling"), p);
    }
  }
  run.write("gaps.csv", csv.str());
  run.note("sweep gaps " + json_array_of(sweep_gaps).dump());
  if (run.has("min_gap")) {
    const double lowest = *std::min_element(all_gaps.begin(), all_gaps.end());
    run.check("min_gap", lowest >= run.threshold("min_gap"),
              "smallest gap " + fmt(lowest) + " (floor " + fmt(run.threshold("min_gap")) + ")");
  }
  if (run.has("bounded_factor")) {
    const auto [lo, hi] = std::minmax_element(sweep_gaps.begin(), sweep_gaps.end());
    const double spread = *lo > 0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    run.check("bounded_factor", spread <= run.threshold("bounded_factor"),
              "max/min sweep gap " + fmt(spread) + " (limit " + fmt(run.threshold("bounded_factor")) + ")");
  }
  return 0;
}

std::string samples_csv(const std::vector<Draw>& draws) {
  std::ostringstream csv;
  csv << "chain,draw,sigma_bar,m_sign\n";
  for (const auto& d : draws) csv << d.chain << ',' << d.draw << ',' << fmt(d.sigma_bar) << ',' << d.m_sign << '\n';
  return csv.str();
}

Json sampler_json(const SamplerConfig& s) {
  static const char* inits[] = {"all_plus", "all_minus", "random", "cold_at_t"};
  return {{"burn_in_sweeps", s.burn_in_sweeps}, {"thin_sweeps", s.thin_sweeps},
          {"n_samples", s.n_samples},           {"n_chains", s.n_chains},
          {"master_seed", s.master_seed},       {"init", inits[static_cast<int>(s.init)]}};
}

int line_graph_shift(const ExperimentConfig& cfg, Run& run) {
  const CouplingMatrix a = build_coupling(cfg.coupling, "coupling", run.base());
  const double t = solve_fixed_point(cfg.params);
  const double mu = counterexample_mu(cfg.params, CounterexampleKind::line_graph);
  const auto draws = sample_ising(a, cfg.params, *cfg.sampler);
  std::vector<double> bars;
  for (const auto& d : draws) bars.push_back(d.sigma_bar);
  const auto centered = center(bars, Statistic::sqrtn_minus_t, a.size(), t);
  double mean = 0;
  for (double v : centered.values) mean += v;
  mean /= static_cast<double>(centered.values.size());
  run.write("samples.csv", samples_csv(draws));
  const double rel = std::abs(mean + mu) / std::abs(mu);
  run.write("summary.json", Json{{"n", a.size()},
                                 {"t", t},
                                 {"mu", mu},
                                 {"mean_sqrtN_minus_t", mean},
                                 {"target", -mu},
                                 {"relative_error", rel}}
                                    .dump(2) +
                                "\n");
  run.note("N=" + std::to_string(a.size()) + " mean sqrt(N)(sigma_bar - t) = " + fmt(mean) + ", -mu = " + fmt(-mu));
  if (run.has("relative_tolerance")) {
    const bool gating = cfg.acceptance.value("gating", true);
    run.check("relative_tolerance", mu > 0 && rel <= run.threshold("relative_tolerance"),
              "relative error " + fmt(rel) + " (limit " + fmt(run.threshold("relative_tolerance")) + ")", gating);
  }
  return 0;
}

int concentration(const ExperimentConfig& cfg, Run& run) {
  const auto sizes = sizes_of(cfg);
  const auto deltas = cfg.analysis.at("deltas").get<std::vector<double>>();
  const double t = solve_fixed_point(cfg.params);
  std::ostringstream csv;
  csv << "n,delta,log_prob,log_prob_over_n\n";
  std::vector<std::vector<double>> per_delta(deltas.size());
  for (int n : sizes) {
    const auto law = exact_law(with_size(cfg.coupling, n), cfg.params, run.base());
    const auto curve = concentration_curve(law, t, deltas);
    for (std::size_t k = 0; k < curve.size(); ++k) {
      const double rate = curve[k].log_prob / n;
      csv << n << ',' << fmt(curve[k].delta) << ',' << fmt(curve[k].log_prob) << ',' << fmt(rate) << '\n';
      per_delta[k].push_back(rate);
    }
  }
  run.write("concentration.csv", csv.str());
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    const auto& r = per_delta[k];
    run.note("delta=" + fmt(deltas[k]) + " log_prob/n = " + json_array_of(r).dump());
    const std::string tag = "delta_" + fmt(deltas[k]);
    run.check(tag + ".negative", std::all_of(r.begin(), r.end(), [](double v) { return v < 0; }),
              "max log_prob/n = " + fmt(*std::max_element(r.begin(), r.end())));
    if (run.has("relative_change") && r.size() > 1) {
      // consecutive relative changes must stay below the limit and shrink
      std::vector<double> changes;
      for (std::size_t i = 1; i < r.size(); ++i) changes.push_back(std::abs(r[i] / r[i - 1] - 1.0));
      bool ok = true;
      for (std::size_t i = 0; i < changes.size(); ++i)
        ok = ok && changes[i] <= run.threshold("relative_change") && (i == 0 || changes[i] <= changes[i - 1]);
      run.check(tag + ".relative_change", ok,
                "consecutive changes " + json_array_of(changes).dump() + " (limit " +
                    fmt(run.threshold("relative_change")) + ", shrinking)");
    }
  }
  return 0;
}

std::string coupling_label(const Json& spec) { return spec.dump(); }

int exact(const ExperimentConfig& cfg, const RunOptions& options, Run& run) {
  const auto law = exact_law(cfg.coupling, cfg.params, options.base_dir);
  std::ostringstream csv;
  write_law_csv(csv, law);
  run.write("law.csv", csv.str());
  run.write("law.json", Json{{"n", law.n},
                             {"beta", cfg.params.beta},
                             {"B", cfg.params.b_field},
                             {"log_z", law.log_z},
                             {"label", coupling_label(cfg.coupling)}}
                                .dump(2) +
                            "\n");
  run.note("n=" + std::to_string(law.n) + " log_z=" + fmt(law.log_z));
  return 0;
}

int sample(const ExperimentConfig& cfg, const RunOptions& options, Run& run) {
  const CouplingMatrix a = build_coupling(cfg.coupling, "coupling", options.base_dir);
  const auto draws = sample_ising(a, cfg.params, *cfg.sampler);
  run.write("samples.csv", samples_csv(draws));
  run.write("samples.json", Json{{"sampler", sampler_json(*cfg.sampler)},
                                 {"coupling", a.label()},
                                 {"params", {{"beta", cfg.params.beta}, {"B", cfg.params.b_field}}}}
                                    .dump(2) +
                                "\n");
  run.note(std::to_string(draws.size()) + " draws");
  return 0;
}

int diagnose(const ExperimentConfig& cfg, const RunOptions& options, Run& run) {
  const CouplingMatrix a = build_coupling(cfg.coupling, "coupling", options.base_dir);
  const auto d = diagnostics(a);
  const double t = std::abs(solve_fixed_point(cfg.params));
  const auto r = rate_terms(d, t, a.size());
  run.write("diagnostics.json", Json{{"label", a.label()},
                                     {"n", d.n},
                                     {"frobenius_sq", d.frobenius_sq},
                                     {"lambda1", d.lambda1},
                                     {"lambda2", d.lambda2},
                                     {"alpha", d.alpha},
                                     {"sum_dev", d.sum_dev},
                                     {"sum_dev_sq", d.sum_dev_sq},
                                     {"max_dev", d.max_dev},
                                     {"well_connected_ratio", d.well_connected_ratio},
                                     {"a4_stat", d.a4_stat},
                                     {"rate_terms",
                                      {{"eta", r.eta},
                                       {"nonuniq", r.nonuniq},
                                       {"epsilon", r.epsilon},
                                       {"r", r.r},
                                       {"delta", r.delta},
                                       {"theta11", r.theta11}}}}
                                        .dump(2) +
                                    "\n");
  return 0;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run_experiment(const ExperimentConfig& cfg, const RunOptions& options, std::ostream& out) {
  Run run(cfg, options, out);
  const std::string& kind = cfg.experiment;
  if (kind == "rate") rate(cfg, run);
  else if (kind == "disjoint-limit") disjoint_limit(cfg, run);
  else if (kind == "meanfield-gap") meanfield_gap(cfg, run);
  else if (kind == "line-graph-shift") line_graph_shift(cfg, run);
  else if (kind == "concentration") concentration(cfg, run);
  else if (kind == "exact") exact(cfg, options, run);
  else if (kind == "sample") sample(cfg, options, run);
  else if (kind == "diagnose") diagnose(cfg, options, run);
  return run.finish();
}

}  // namespace ising::cli
