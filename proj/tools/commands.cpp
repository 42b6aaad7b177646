#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "ising/analysis.hpp"
#include "ising/error.hpp"
#include "ising/matrix_io.hpp"
#include "ising_cli.hpp"

namespace ising::cli {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  std::string output;
  std::string format = "json";
};

struct ModelArgs {
  double beta = 0.5;
  double b_field = 0.0;
};

// "ensemble key=value ..." -> builder spec. Values parse as JSON when they
// can (numbers, booleans, arrays) and fall back to strings.
Json spec_from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw InvalidArgument("coupling", "missing ensemble name");
  Json spec{{"ensemble", tokens.front()}};
  for (std::size_t k = 1; k < tokens.size(); ++k) {
    const auto eq = tokens[k].find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidArgument("coupling", "expected key=value, got '" + tokens[k] + "'");
    const std::string key = tokens[k].substr(0, eq), value = tokens[k].substr(eq + 1);
    Json parsed = Json::parse(value, nullptr, false);
    spec[key] = parsed.is_discarded() ? Json(value) : parsed;
  }
  return spec;
}

RunOptions options_from(const Globals& g) {
  RunOptions o;
  if (g.seed_given) o.seed = g.seed;
  o.threads = g.threads;
  if (!g.output.empty()) o.output_dir = g.output;
  return o;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

void print_object(std::ostream& out, const Json& obj, const std::string& format) {
  if (format == "json") {
    out << obj.dump(2) << '\n';
    return;
  }
  out << "key,value\n";
  for (const auto& [k, v] : obj.items()) out << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

// Synthesizes a config for a file-producing subcommand and runs it.
int run_synthesized(const std::string& name, const std::string& experiment, const Json& coupling,
                    const ModelArgs& m, const Json& sampler, const Globals& g, std::ostream& out) {
  Json doc{{"name", name}, {"experiment", experiment}, {"coupling", coupling},
           {"params", {{"beta", m.beta}, {"B", m.b_field}}}};
  if (!sampler.is_null()) doc["sampler"] = sampler;
  const RunOptions options = options_from(g);
  return run_experiment(parse_config(doc, options), options, out);
}

Json resolved(const Json& spec, const Globals& g) { return resolve_coupling(spec, "coupling", g.seed); }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ising magnetization laws on general coupling matrices", std::string(kToolName)};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed for builders and samplers");
  app.add_option("--threads", g.threads, "Worker threads for independent chains")->check(CLI::PositiveNumber);
  app.add_option("--output", g.output, "Output directory; without it results go to stdout");
  app.add_option("--format", g.format, "Console format")->check(CLI::IsMember({"csv", "json"}));

  auto add_model = [](CLI::App* sub, ModelArgs& m) {
    sub->add_option("--beta", m.beta, "Inverse temperature")->capture_default_str();
    sub->add_option("--B", m.b_field, "External field")->capture_default_str();
  };

  std::vector<std::string> tokens;
  ModelArgs model;

  auto* build = app.add_subcommand("build", "Build a coupling matrix and write it in the text matrix format");
  build->add_option("spec", tokens, "ensemble followed by key=value parameters")->required();

  auto* diagnose = app.add_subcommand("diagnose", "Spectral and row-sum diagnostics of a coupling matrix");
  diagnose->add_option("spec", tokens, "ensemble followed by key=value parameters")->required();
  add_model(diagnose, model);

  auto* fixed = app.add_subcommand("fixed-point", "Regime, fixed point and limit variance");
  add_model(fixed, model);

  auto* exact_cmd = app.add_subcommand("exact", "Exact magnetization law");
  exact_cmd->add_option("spec", tokens, "ensemble followed by key=value parameters")->required();
  add_model(exact_cmd, model);

  SamplerConfig scfg;
  std::string init = "random";
  auto* sample_cmd = app.add_subcommand("sample", "Glauber samples of the magnetization");
  sample_cmd->add_option("spec", tokens, "ensemble followed by key=value parameters")->required();
  add_model(sample_cmd, model);
  sample_cmd->add_option("--burn-in", scfg.burn_in_sweeps)->capture_default_str();
  sample_cmd->add_option("--thin", scfg.thin_sweeps)->capture_default_str();
  sample_cmd->add_option("--samples", scfg.n_samples)->capture_default_str();
  sample_cmd->add_option("--chains", scfg.n_chains)->capture_default_str();
  sample_cmd->add_option("--init", init)->check(CLI::IsMember({"all_plus", "all_minus", "random", "cold_at_t"}));

  std::string input, statistic = "sqrtN_minus_t", limit = "gaussian";
  int analyze_n = 0;
  double shift = 0;
  auto* analyze = app.add_subcommand("analyze", "KS distance of a sample or exact law to a limit law");
  analyze->add_option("spec", tokens, "exact law: ensemble followed by key=value parameters");
  analyze->add_option("--input", input, "samples CSV with a sigma_bar column")->check(CLI::ExistingFile);
  analyze->add_option("--n", analyze_n, "system size of the sampled model (with --input)");
  analyze->add_option("--statistic", statistic)->check(CLI::IsMember({"sqrtN_minus_t", "sqrtN_minus_M", "quarterN"}));
  analyze->add_option("--limit", limit)->check(CLI::IsMember({"gaussian", "quartic_w", "modified_w_tilde"}));
  analyze->add_option("--shift", shift, "shift of the limit law");
  add_model(analyze, model);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);

  std::string reproduce_name;
  auto* reproduce = app.add_subcommand("reproduce", "Run a canonical experiment and report PASS/FAIL");
  reproduce->add_option("name", reproduce_name)->required()->check(CLI::IsMember(canonical_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }
  g.seed_given = seed_opt->count() > 0;
  scfg.master_seed = g.seed;

  try {
    if (build->parsed()) {
      const Json spec = resolved(spec_from_tokens(tokens), g);
      const CouplingMatrix a = build_coupling(spec, "coupling", ".");
      if (g.output.empty()) {
        write_matrix(out, a);
      } else {
        std::filesystem::create_directories(g.output);
        write_matrix(std::filesystem::path(g.output) / "matrix.txt", a);
        out << a.label() << '\n';
      }
      return kSuccess;
    }
    if (diagnose->parsed()) {
      const Json spec = resolved(spec_from_tokens(tokens), g);
      if (!g.output.empty()) return run_synthesized("diagnose", "diagnose", spec, model, nullptr, g, out);
      const CouplingMatrix a = build_coupling(spec, "coupling", ".");
      const auto d = diagnostics(a);
      const auto r = rate_terms(d, std::abs(solve_fixed_point({model.beta, model.b_field})), a.size());
      print_object(out,
                   Json{{"label", a.label()},          {"n", d.n},
                        {"frobenius_sq", d.frobenius_sq}, {"lambda1", d.lambda1},
                        {"lambda2", d.lambda2},        {"alpha", d.alpha},
                        {"sum_dev", d.sum_dev},        {"sum_dev_sq", d.sum_dev_sq},
                        {"max_dev", d.max_dev},        {"well_connected_ratio", d.well_connected_ratio},
                        {"a4_stat", d.a4_stat},        {"eta", r.eta},
                        {"delta", r.delta},            {"epsilon", r.epsilon}},
                   g.format);
      return kSuccess;
    }
    if (fixed->parsed()) {
      const ModelParams p{model.beta, model.b_field};
      const Regime regime = classify(p);
      Json obj{{"beta", p.beta}, {"B", p.b_field}, {"regime", to_string(regime.label)}, {"t", regime.t}};
      obj["tau"] = regime.tau ? Json(*regime.tau) : Json(nullptr);
      obj["phi_prime"] = regime.phi_prime;
      print_object(out, obj, g.format);
      return kSuccess;
    }
    if (exact_cmd->parsed()) {
      const Json spec = resolved(spec_from_tokens(tokens), g);
      if (!g.output.empty()) return run_synthesized("exact", "exact", spec, model, nullptr, g, out);
      const ModelParams p{model.beta, model.b_field};
      validate(p);
      const auto law = exact_law(spec, p, ".");
      if (g.format == "csv") {
        write_law_csv(out, law);
      } else {
        Json obj{{"n", law.n}, {"beta", p.beta}, {"B", p.b_field}, {"log_z", law.log_z}, {"label", spec.dump()}};
        obj["support"] = law.support;
        obj["prob"] = law.probs;
        out << obj.dump() << '\n';
      }
      return kSuccess;
    }
    if (sample_cmd->parsed()) {
      const Json spec = resolved(spec_from_tokens(tokens), g);
      const Json sampler{{"burn_in_sweeps", scfg.burn_in_sweeps}, {"thin_sweeps", scfg.thin_sweeps},
                         {"n_samples", scfg.n_samples},           {"n_chains", scfg.n_chains},
                         {"master_seed", scfg.master_seed},       {"init", init}};
      if (!g.output.empty()) return run_synthesized("sample", "sample", spec, model, sampler, g, out);
      const ModelParams p{model.beta, model.b_field};
      const ExperimentConfig cfg = parse_config(
          Json{{"name", "sample"}, {"experiment", "sample"}, {"coupling", spec},
               {"params", {{"beta", p.beta}, {"B", p.b_field}}}, {"sampler", sampler}},
          options_from(g));
      const CouplingMatrix a = build_coupling(spec, "coupling", ".");
      out << "chain,draw,sigma_bar,m_sign\n";
      for (const auto& d : sample_ising(a, p, *cfg.sampler))
        out << d.chain << ',' << d.draw << ',' << fmt(d.sigma_bar) << ',' << d.m_sign << '\n';
      return kSuccess;
    }
    if (analyze->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      const ModelParams p{model.beta, model.b_field};
      validate(p);
      const Regime regime = classify(p);
      const Statistic stat = *statistic_from_string(statistic);
      LimitLaw law = limit == "quartic_w"          ? LimitLaw::quartic_w()
                     : limit == "modified_w_tilde" ? LimitLaw::modified_w_tilde()
                     : regime.tau                  ? LimitLaw::gaussian(*regime.tau)
                                                   : throw InvalidArgument("limit", "gaussian limit undefined at the critical point");
      law = law.shifted(shift);
      double ks = 0;
      int n = analyze_n;
      if (!input.empty()) {
        if (n < 1) throw InvalidArgument("n", "--n is required with --input");
        std::ifstream in(input);
        std::string line;
        std::getline(in, line);
        std::vector<std::string> header;
        std::stringstream hs(line);
        for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
        const auto col = std::find(header.begin(), header.end(), "sigma_bar") - header.begin();
        if (col == static_cast<long>(header.size())) throw InvalidArgument("input", "no sigma_bar column");
        std::vector<double> bars;
        while (std::getline(in, line)) {
          std::stringstream ls(line);
          std::string cell;
          for (long k = 0; k <= col; ++k) std::getline(ls, cell, ',');
          bars.push_back(std::stod(cell));
        }
        ks = ks_distance(center(bars, stat, n, regime.t), law);
      } else {
        if (tokens.empty()) throw InvalidArgument("input", "give --input samples.csv or an exact-law spec");
        const auto exact = exact_law(resolved(spec_from_tokens(tokens), g), p, ".");
        n = exact.n;
        ks = ks_distance(center(exact, stat, regime.t), law);
      }
      const double sq = std::sqrt(static_cast<double>(n));
      const double rhs = stat == Statistic::quarter_n ? std::log(static_cast<double>(n)) / sq : 1.0 / sq;
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      const Json report{{"statistic", statistic},      {"n", n},          {"regime", to_string(regime.label)},
                        {"ks", ks},                    {"rate_rhs", rhs}, {"fitted_constant", ks / rhs},
                        {"runtime_ms", std::round(ms)}};
      if (!g.output.empty()) {
        std::filesystem::create_directories(g.output);
        std::ofstream(std::filesystem::path(g.output) / "analysis.json") << report.dump(2) << '\n';
      }
      print_object(out, report, g.format);
      return kSuccess;
    }
    if (run_cmd->parsed()) {
      std::ifstream in(config_path);
      const Json doc = Json::parse(in, nullptr, false);
      if (doc.is_discarded()) throw InvalidArgument("config", "not valid JSON: " + config_path);
      RunOptions options = options_from(g);
      options.base_dir = std::filesystem::path(config_path).parent_path();
      if (options.base_dir.empty()) options.base_dir = ".";
      return run_experiment(parse_config(doc, options), options, out);
    }
    if (reproduce->parsed()) {
      const Json doc = Json::parse(*canonical_config(reproduce_name));
      RunOptions options = options_from(g);
      const std::filesystem::path root = g.output.empty() ? std::filesystem::path("ising-out") : std::filesystem::path(g.output);
      options.output_dir = root / reproduce_name;
      return run_experiment(parse_config(doc, options), options, out);
    }
  } catch (const std::exception& e) {
    // validation, size caps and solver failures all land here
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kUsage;
}

}  // namespace ising::cli
