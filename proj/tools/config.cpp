#include <cmath>
#include <set>

#include "ising/analysis.hpp"
#include "ising/error.hpp"
#include "ising/matrix_io.hpp"
#include "ising_cli.hpp"

namespace ising::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& field, const std::string& reason) { throw InvalidArgument(field, reason); }

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
}

void allow_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (auto key : keys) known = known || key == k;
    if (!known) fail(join(path, k), "unknown field");
  }
}

const Json& member(const Json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) fail(join(path, key), "is required");
  return j.at(key);
}

double number(const Json& j, const std::string& path, const std::string& key) {
  const Json& v = member(j, path, key);
  if (!v.is_number()) fail(join(path, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(join(path, key), "must be finite");
  return x;
}

long long integer(const Json& j, const std::string& path, const std::string& key) {
  const Json& v = member(j, path, key);
  if (!v.is_number_integer()) fail(join(path, key), "must be an integer");
  return v.get<long long>();
}

int size_field(const Json& j, const std::string& path, const std::string& key, int minimum) {
  const long long v = integer(j, path, key);
  if (v < minimum || v > 100'000'000) fail(join(path, key), "must be an integer >= " + std::to_string(minimum));
  return static_cast<int>(v);
}

std::string text(const Json& j, const std::string& path, const std::string& key) {
  const Json& v = member(j, path, key);
  if (!v.is_string()) fail(join(path, key), "must be a string");
  return v.get<std::string>();
}

bool flag(const Json& j, const std::string& path, const std::string& key) {
  const Json& v = member(j, path, key);
  if (!v.is_boolean()) fail(join(path, key), "must be true or false");
  return v.get<bool>();
}

std::uint64_t seed_field(const Json& j, const std::string& path) {
  const Json& v = member(j, path, "seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(join(path, "seed"), "must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::vector<int> int_list(const Json& j, const std::string& path, const std::string& key, int minimum) {
  const Json& v = member(j, path, key);
  const std::string field = join(path, key);
  if (!v.is_array() || v.empty()) fail(field, "must be a nonempty array");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer() || x.get<long long>() < minimum)
      fail(field, "entries must be integers >= " + std::to_string(minimum));
    out.push_back(x.get<int>());
  }
  return out;
}

std::vector<std::vector<double>> matrix_field(const Json& j, const std::string& path, const std::string& key) {
  const Json& v = member(j, path, key);
  const std::string field = join(path, key);
  if (!v.is_array() || v.empty()) fail(field, "must be a nonempty array of rows");
  std::vector<std::vector<double>> out;
  for (const auto& row : v) {
    if (!row.is_array()) fail(field, "must be an array of rows");
    auto& r = out.emplace_back();
    for (const auto& x : row) {
      if (!x.is_number()) fail(field, "entries must be numbers");
      r.push_back(x.get<double>());
    }
  }
  return out;
}

void check_probability(double p, const std::string& field) {
  if (!(p > 0 && p <= 1)) fail(field, "must lie in (0, 1]");
}

RegularKind regular_kind(const std::string& name, const std::string& field) {
  if (name == "random_regular") return RegularKind::random_regular;
  if (name == "complete") return RegularKind::complete;
  if (name == "circulant") return RegularKind::circulant;
  if (name == "bipartite_regular") return RegularKind::bipartite_regular;
  fail(field, "unknown kind '" + name + "'");
}

double complete_divisor(const Json& spec, const std::string& path, int n) {
  if (!spec.contains("divisor")) return n - 1.0;
  const Json& d = spec.at("divisor");
  if (d.is_string()) {
    if (d == "degree") return n - 1.0;
    if (d == "n") return n;
  } else if (d.is_number() && d.get<double>() > 0) {
    return d.get<double>();
  }
  fail(join(path, "divisor"), "must be \"degree\", \"n\" or a positive number");
}

// Rethrows builder errors with the config path prepended to the field.
template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    const std::string reason = what.substr(std::min(what.size(), e.field().size() + 2));
    const std::string& field = e.field();
    const bool prefixed = field == path || field.rfind(path + ".", 0) == 0;
    throw InvalidArgument(prefixed ? field : join(path, field), reason);
  }
}

}  // namespace

Json with_size(const Json& spec, int n) {
  Json out = spec;
  out["n"] = n;
  return out;
}

Json resolve_coupling(const Json& spec, const std::string& path, std::uint64_t default_seed) {
  require_object(spec, path);
  const std::string ensemble = text(spec, path, "ensemble");
  Json out = spec;
  auto default_seed_in = [&] {
    if (!out.contains("seed")) out["seed"] = default_seed;
    seed_field(out, path);
  };
  if (ensemble == "curie_weiss") {
    allow_keys(spec, path, {"ensemble", "n"});
    size_field(spec, path, "n", 1);
  } else if (ensemble == "complete") {
    allow_keys(spec, path, {"ensemble", "n", "divisor"});
    complete_divisor(spec, path, size_field(spec, path, "n", 2));
  } else if (ensemble == "regular") {
    allow_keys(spec, path, {"ensemble", "n", "d", "kind", "seed"});
    size_field(spec, path, "n", 2);
    size_field(spec, path, "d", 1);
    if (!out.contains("kind")) out["kind"] = "random_regular";
    regular_kind(text(out, path, "kind"), join(path, "kind"));
    default_seed_in();
  } else if (ensemble == "erdos_renyi") {
    allow_keys(spec, path, {"ensemble", "n", "p", "directed", "seed"});
    size_field(spec, path, "n", 2);
    check_probability(number(spec, path, "p"), join(path, "p"));
    if (!out.contains("directed")) out["directed"] = false;
    flag(out, path, "directed");
    default_seed_in();
  } else if (ensemble == "sbm") {
    allow_keys(spec, path, {"ensemble", "block_sizes", "prob", "seed"});
    int_list(spec, path, "block_sizes", 1);
    matrix_field(spec, path, "prob");
    default_seed_in();
  } else if (ensemble == "graphon") {
    allow_keys(spec, path, {"ensemble", "n", "grid", "gamma", "seed"});
    size_field(spec, path, "n", 1);
    matrix_field(spec, path, "grid");
    number(spec, path, "gamma");
    default_seed_in();
  } else if (ensemble == "block_spin") {
    allow_keys(spec, path, {"ensemble", "n", "a", "b"});
    size_field(spec, path, "n", 2);
    number(spec, path, "a");
    number(spec, path, "b");
  } else if (ensemble == "wigner") {
    allow_keys(spec, path, {"ensemble", "n", "law", "mean", "seed"});
    size_field(spec, path, "n", 1);
    if (!out.contains("law")) out["law"] = "exponential";
    const std::string law = text(out, path, "law");
    if (law != "exponential" && law != "uniform") fail(join(path, "law"), "must be exponential or uniform");
    if (!out.contains("mean")) out["mean"] = 1.0;
    if (!(number(out, path, "mean") > 0)) fail(join(path, "mean"), "must be positive");
    default_seed_in();
  } else if (ensemble == "line_graph") {
    allow_keys(spec, path, {"ensemble", "m"});
    size_field(spec, path, "m", 4);
  } else if (ensemble == "blocked") {
    allow_keys(spec, path, {"ensemble", "block_sizes", "within", "between"});
    const auto sizes = int_list(spec, path, "block_sizes", 1);
    if (sizes.size() > kMaxBlocks) fail(join(path, "block_sizes"), "at most 3 blocks are supported");
    if (number(spec, path, "within") < 0) fail(join(path, "within"), "must be nonnegative");
    if (number(spec, path, "between") < 0) fail(join(path, "between"), "must be nonnegative");
  } else if (ensemble == "disjoint_union") {
    allow_keys(spec, path, {"ensemble", "parts", "rescale"});
    const Json& parts = member(spec, path, "parts");
    if (!parts.is_array() || parts.empty()) fail(join(path, "parts"), "must be a nonempty array");
    Json resolved = Json::array();
    for (std::size_t k = 0; k < parts.size(); ++k)
      resolved.push_back(resolve_coupling(parts[k], join(path, "parts[" + std::to_string(k) + "]"), default_seed + k));
    out["parts"] = resolved;
    if (!out.contains("rescale")) out["rescale"] = false;
    flag(out, path, "rescale");
  } else if (ensemble == "file") {
    allow_keys(spec, path, {"ensemble", "path"});
    text(spec, path, "path");
  } else {
    fail(join(path, "ensemble"), "unknown ensemble '" + ensemble + "'");
  }
  return out;
}

CouplingMatrix build_coupling(const Json& spec, const std::string& path, const std::filesystem::path& base_dir) {
  const std::string ensemble = text(spec, path, "ensemble");
  return with_path(path, [&]() -> CouplingMatrix {
    if (ensemble == "curie_weiss") {
      const int n = size_field(spec, path, "n", 1);
      return build_complete(n, n);
    }
    if (ensemble == "complete") {
      const int n = size_field(spec, path, "n", 2);
      return build_complete(n, complete_divisor(spec, path, n));
    }
    if (ensemble == "regular")
      return build_regular(size_field(spec, path, "n", 2), size_field(spec, path, "d", 1),
                           regular_kind(text(spec, path, "kind"), join(path, "kind")), seed_field(spec, path));
    if (ensemble == "erdos_renyi") {
      const int n = size_field(spec, path, "n", 2);
      const double p = number(spec, path, "p");
      return flag(spec, path, "directed") ? build_erdos_renyi_directed(n, p, seed_field(spec, path))
                                          : build_erdos_renyi(n, p, seed_field(spec, path));
    }
    if (ensemble == "sbm")
      return build_sbm(int_list(spec, path, "block_sizes", 1), matrix_field(spec, path, "prob"),
                       seed_field(spec, path));
    if (ensemble == "graphon")
      return build_graphon(size_field(spec, path, "n", 1), matrix_field(spec, path, "grid"),
                           number(spec, path, "gamma"), seed_field(spec, path));
    if (ensemble == "block_spin")
      return build_block_spin(size_field(spec, path, "n", 2), number(spec, path, "a"), number(spec, path, "b"));
    if (ensemble == "wigner") {
      const auto kind = text(spec, path, "law") == "uniform" ? WignerLaw::Kind::uniform : WignerLaw::Kind::exponential;
      return build_wigner(size_field(spec, path, "n", 1), {kind, number(spec, path, "mean")}, seed_field(spec, path));
    }
    if (ensemble == "line_graph") return build_line_graph_complete(size_field(spec, path, "m", 4));
    if (ensemble == "blocked") {
      const auto sizes = int_list(spec, path, "block_sizes", 1);
      const double within = number(spec, path, "within"), between = number(spec, path, "between");
      std::vector<int> block;
      for (std::size_t b = 0; b < sizes.size(); ++b) block.insert(block.end(), sizes[b], static_cast<int>(b));
      const int n = static_cast<int>(block.size());
      std::vector<Triplet> entries;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const double v = block[i] == block[j] ? within : between;
          if (v > 0) entries.push_back({i, j, v});
        }
      return CouplingMatrix(n, std::move(entries), "blocked");
    }
    if (ensemble == "disjoint_union") {
      std::vector<CouplingMatrix> parts;
      const Json& list = spec.at("parts");
      for (std::size_t k = 0; k < list.size(); ++k)
        parts.push_back(build_coupling(list[k], join(path, "parts[" + std::to_string(k) + "]"), base_dir));
      return build_disjoint_union(parts, flag(spec, path, "rescale"));
    }
    if (ensemble == "file") {
      const std::filesystem::path file = base_dir / text(spec, path, "path");
      if (!std::filesystem::exists(file)) fail(join(path, "path"), "file not found: " + file.string());
      return read_matrix(file);
    }
    fail(join(path, "ensemble"), "unknown ensemble '" + ensemble + "'");
  });
}

MagnetizationLaw exact_law(const Json& spec, const ModelParams& p, const std::filesystem::path& base_dir) {
  const std::string ensemble = spec.at("ensemble").get<std::string>();
  if (ensemble == "curie_weiss") return magnetization_law_cw(spec.at("n").get<int>(), p);
  if (ensemble == "blocked")
    return with_path("coupling", [&] {
      return magnetization_law_blocked(spec.at("block_sizes").get<std::vector<int>>(), spec.at("within").get<double>(),
                                       spec.at("between").get<double>(), p);
    });
  const CouplingMatrix a = build_coupling(spec, "coupling", base_dir);
  return magnetization_law_bruteforce(a, p);
}

ExperimentConfig parse_config(const Json& doc, const RunOptions& options) {
  require_object(doc, "config");
  allow_keys(doc, "", {"name", "experiment", "coupling", "params", "sampler", "analysis", "acceptance", "output_dir"});
  ExperimentConfig cfg;
  cfg.name = text(doc, "", "name");
  if (cfg.name.empty()) fail("name", "must be nonempty");
  cfg.experiment = text(doc, "", "experiment");
  static const std::set<std::string> kinds{"rate",          "disjoint-limit", "meanfield-gap", "line-graph-shift",
                                           "concentration", "exact",          "sample",        "diagnose"};
  if (!kinds.count(cfg.experiment)) fail("experiment", "unknown experiment '" + cfg.experiment + "'");

  const std::uint64_t seed = options.seed.value_or(0);
  cfg.coupling = resolve_coupling(member(doc, "", "coupling"), "coupling", seed);
  if (cfg.coupling.at("ensemble") == "file") {
    const auto file = options.base_dir / cfg.coupling.at("path").get<std::string>();
    if (!std::filesystem::exists(file)) fail("coupling.path", "file not found: " + file.string());
  }

  const Json& params = member(doc, "", "params");
  require_object(params, "params");
  allow_keys(params, "params", {"beta", "B"});
  cfg.params.beta = number(params, "params", "beta");
  cfg.params.b_field = params.contains("B") ? number(params, "params", "B") : 0.0;
  with_path("params", [&] {
    validate(cfg.params);
    return 0;
  });

  Json resolved_sampler;
  if (doc.contains("sampler")) {
    const Json& s = doc.at("sampler");
    require_object(s, "sampler");
    allow_keys(s, "sampler", {"burn_in_sweeps", "thin_sweeps", "n_samples", "n_chains", "master_seed", "init"});
    SamplerConfig sc;
    if (s.contains("burn_in_sweeps")) sc.burn_in_sweeps = size_field(s, "sampler", "burn_in_sweeps", 0);
    if (s.contains("thin_sweeps")) sc.thin_sweeps = size_field(s, "sampler", "thin_sweeps", 1);
    if (s.contains("n_samples")) sc.n_samples = size_field(s, "sampler", "n_samples", 1);
    if (s.contains("n_chains")) sc.n_chains = size_field(s, "sampler", "n_chains", 1);
    sc.master_seed = seed;
    if (s.contains("master_seed")) {
      const Json& m = s.at("master_seed");
      if (!m.is_number_integer() || (m.is_number_integer() && !m.is_number_unsigned() && m.get<long long>() < 0))
        fail("sampler.master_seed", "must be a nonnegative integer");
      if (!options.seed) sc.master_seed = m.get<std::uint64_t>();
    }
    const std::string init = s.contains("init") ? text(s, "sampler", "init") : "random";
    if (init == "all_plus") sc.init = InitKind::all_plus;
    else if (init == "all_minus") sc.init = InitKind::all_minus;
    else if (init == "random") sc.init = InitKind::random;
    else if (init == "cold_at_t") sc.init = InitKind::cold_at_t;
    else fail("sampler.init", "unknown initialization '" + init + "'");
    sc.threads = options.threads;
    with_path("sampler", [&] {
      validate(sc);
      return 0;
    });
    cfg.sampler = sc;
    resolved_sampler = Json{{"burn_in_sweeps", sc.burn_in_sweeps}, {"thin_sweeps", sc.thin_sweeps},
                            {"n_samples", sc.n_samples},           {"n_chains", sc.n_chains},
                            {"master_seed", sc.master_seed},       {"init", init}};
  } else if (cfg.experiment == "sample" || cfg.experiment == "line-graph-shift") {
    fail("sampler", "is required for experiment '" + cfg.experiment + "'");
  }

  if (doc.contains("analysis")) {
    cfg.analysis = doc.at("analysis");
    require_object(cfg.analysis, "analysis");
    allow_keys(cfg.analysis, "analysis", {"statistic", "limit", "shift", "sizes", "deltas", "extra"});
    if (cfg.analysis.contains("statistic") && !statistic_from_string(text(cfg.analysis, "analysis", "statistic")))
      fail("analysis.statistic", "must be sqrtN_minus_t, sqrtN_minus_M or quarterN");
    if (cfg.analysis.contains("limit")) {
      const std::string limit = text(cfg.analysis, "analysis", "limit");
      if (limit != "gaussian" && limit != "quartic_w" && limit != "modified_w_tilde")
        fail("analysis.limit", "must be gaussian, quartic_w or modified_w_tilde");
    }
    if (cfg.analysis.contains("shift")) number(cfg.analysis, "analysis", "shift");
    if (cfg.analysis.contains("sizes")) int_list(cfg.analysis, "analysis", "sizes", 1);
    if (cfg.analysis.contains("deltas")) {
      const Json& d = cfg.analysis.at("deltas");
      if (!d.is_array() || d.empty()) fail("analysis.deltas", "must be a nonempty array");
      for (const auto& x : d)
        if (!x.is_number() || !(x.get<double>() > 0)) fail("analysis.deltas", "entries must be positive numbers");
    }
    if (cfg.analysis.contains("extra")) {
      Json& extra = cfg.analysis["extra"];
      if (!extra.is_array()) fail("analysis.extra", "must be an array");
      for (std::size_t k = 0; k < extra.size(); ++k) {
        const std::string path = "analysis.extra[" + std::to_string(k) + "]";
        require_object(extra[k], path);
        allow_keys(extra[k], path, {"coupling", "params"});
        extra[k]["coupling"] = resolve_coupling(member(extra[k], path, "coupling"), path + ".coupling", seed + k + 1);
        const Json& p = member(extra[k], path, "params");
        require_object(p, path + ".params");
        allow_keys(p, path + ".params", {"beta", "B"});
        ModelParams mp{number(p, path + ".params", "beta"), p.contains("B") ? number(p, path + ".params", "B") : 0.0};
        with_path(path + ".params", [&] {
          validate(mp);
          return 0;
        });
      }
    }
  }
  if ((cfg.experiment == "rate" || cfg.experiment == "concentration") && !cfg.analysis.contains("sizes"))
    fail("analysis.sizes", "is required for experiment '" + cfg.experiment + "'");
  if (cfg.experiment == "concentration" && !cfg.analysis.contains("deltas"))
    fail("analysis.deltas", "is required for experiment 'concentration'");

  if (doc.contains("acceptance")) {
    cfg.acceptance = doc.at("acceptance");
    require_object(cfg.acceptance, "acceptance");
    allow_keys(cfg.acceptance, "acceptance",
               {"constant_band", "strictly_decreasing", "log_rate_factor", "mass_tolerance", "min_gap",
                "bounded_factor", "relative_tolerance", "relative_change", "gating"});
    for (const auto& [k, v] : cfg.acceptance.items())
      if (!v.is_number() && !v.is_boolean()) fail("acceptance." + k, "must be a number or boolean");
  }

  const std::string out_dir = doc.contains("output_dir") ? text(doc, "", "output_dir") : cfg.name;
  cfg.output_dir = options.output_dir ? *options.output_dir : std::filesystem::path(out_dir);

  cfg.resolved = Json{{"name", cfg.name},
                      {"experiment", cfg.experiment},
                      {"coupling", cfg.coupling},
                      {"params", {{"beta", cfg.params.beta}, {"B", cfg.params.b_field}}}};
  if (cfg.sampler) cfg.resolved["sampler"] = resolved_sampler;
  cfg.resolved["analysis"] = cfg.analysis;
  cfg.resolved["acceptance"] = cfg.acceptance;
  return cfg;
}

}  // namespace ising::cli
