#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ising/error.hpp"
#include "ising_cli.hpp"

using namespace ising;
using namespace ising::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ising");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ising-cli-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_config(const std::filesystem::path& dir, const Json& doc) {
  const auto path = dir / "config.json";
  std::ofstream(path) << doc.dump(2);
  return path;
}

Json small_rate_config(const std::filesystem::path& out) {
  return Json{{"name", "small-rate"},
              {"experiment", "rate"},
              {"coupling", {{"ensemble", "curie_weiss"}, {"n", 10}}},
              {"params", {{"beta", 0.5}, {"B", 0.0}}},
              {"analysis", {{"statistic", "sqrtN_minus_t"}, {"limit", "gaussian"}, {"sizes", {50, 200}}}},
              {"acceptance", {{"constant_band", 0.4}}},
              {"output_dir", out.string()}};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run emits rate.csv and a manifest") {
  const auto dir = scratch("rate");
  const auto cfg = write_config(dir, small_rate_config(dir / "out"));
  const auto r = invoke({"run", cfg.string()});
  CHECK(r.code == kSuccess);
  CHECK(r.out.find("PASS small-rate.constant_band") != std::string::npos);
  const std::string csv = slurp(dir / "out" / "rate.csv");
  CHECK(csv.rfind("n,ks,ks_times_sqrt_n\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const Json manifest = Json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest.at("version") == kToolVersion);
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  CHECK(manifest.at("files").size() == 2);
  CHECK(manifest.at("config").at("coupling").at("ensemble") == "curie_weiss");
  const Json analysis = Json::parse(slurp(dir / "out" / "analysis.json"));
  for (const char* key : {"statistic", "n", "regime", "ks", "rate_rhs", "fitted_constant", "runtime_ms"})
    CHECK(analysis.at(0).contains(key));
}

TEST_CASE("the same config twice gives byte-identical CSV") {
  const auto dir = scratch("determinism");
  Json doc{{"name", "draws"},
           {"experiment", "sample"},
           {"coupling", {{"ensemble", "erdos_renyi"}, {"n", 30}, {"p", 0.3}, {"seed", 4}}},
           {"params", {{"beta", 0.8}, {"B", 0.1}}},
           {"sampler", {{"burn_in_sweeps", 10}, {"n_samples", 40}, {"n_chains", 3}, {"master_seed", 9}}}};
  doc["output_dir"] = (dir / "a").string();
  const auto first = write_config(dir, doc);
  REQUIRE(invoke({"--threads", "3", "run", first.string()}).code == kSuccess);
  doc["output_dir"] = (dir / "b").string();
  const auto second = write_config(dir, doc);
  REQUIRE(invoke({"run", second.string()}).code == kSuccess);
  const std::string a = slurp(dir / "a" / "samples.csv");
  CHECK(a.rfind("chain,draw,sigma_bar,m_sign\n", 0) == 0);
  CHECK(a == slurp(dir / "b" / "samples.csv"));
  const Json sidecar = Json::parse(slurp(dir / "a" / "samples.json"));
  CHECK(sidecar.at("sampler").at("master_seed") == 9);
  CHECK(sidecar.contains("coupling"));
}

TEST_CASE("a bad probability names coupling.p") {
  const auto dir = scratch("bad-p");
  Json doc = small_rate_config(dir / "out");
  doc["coupling"] = {{"ensemble", "erdos_renyi"}, {"n", 10}, {"p", 1.5}};
  const auto r = invoke({"run", write_config(dir, doc).string()});
  CHECK(r.code == kValidation);
  CHECK(r.err.find("coupling.p") != std::string::npos);
}

TEST_CASE("config validation names the offending field") {
  const RunOptions options;
  auto field_of = [&](const Json& doc) {
    try {
      parse_config(doc, options);
    } catch (const InvalidArgument& e) {
      return e.field();
    }
    return std::string("none");
  };
  Json base = small_rate_config("out");
  CHECK(field_of(base) == "none");
  Json doc = base;
  doc["params"]["beta"] = -1;
  CHECK(field_of(doc) == "params.beta");
  doc = base;
  doc["analysis"]["statistic"] = "median";
  CHECK(field_of(doc) == "analysis.statistic");
  doc = base;
  doc["colour"] = "blue";
  CHECK(field_of(doc) == "colour");
  doc = base;
  doc["coupling"] = {{"ensemble", "regular"}, {"n", 10}};
  CHECK(field_of(doc) == "coupling.d");
  doc = base;
  doc["coupling"] = {{"ensemble", "file"}, {"path", "does-not-exist.txt"}};
  CHECK(field_of(doc) == "coupling.path");
  doc = base;
  doc["experiment"] = "sample";
  CHECK(field_of(doc) == "sampler");
  doc = base;
  doc["name"] = "";
  CHECK(field_of(doc) == "name");
}

TEST_CASE("builder constraint violations surface with their config path") {
  CHECK_THROWS_WITH_AS(build_coupling(Json{{"ensemble", "regular"}, {"n", 5}, {"d", 3}, {"kind", "random_regular"},
                                           {"seed", 1}},
                                      "coupling", "."),
                       doctest::Contains("coupling.d"), InvalidArgument);
}

TEST_CASE("canonical configs parse and match the shipped files") {
  REQUIRE(canonical_names().size() == 6);
  for (const auto& name : canonical_names()) {
    const auto text = canonical_config(name);
    REQUIRE(text.has_value());
    const Json doc = Json::parse(*text);
    CHECK(doc.at("name") == name);
    CHECK_NOTHROW(parse_config(doc, RunOptions{}));
    CHECK(Json::parse(slurp(std::filesystem::path(ISING_SOURCE_DIR) / "configs" / (name + ".json"))) == doc);
  }
  CHECK(!canonical_config("no-such-experiment").has_value());
  const Json schema = Json::parse(config_schema());
  CHECK(schema.at("required").size() == 4);
}

TEST_CASE("reproduce rejects unknown names as a usage error") {
  CHECK(invoke({"reproduce", "no-such-experiment"}).code == kUsage);
  CHECK(invoke({}).code == kUsage);
  CHECK(invoke({"fixed-point", "--beta", "oops"}).code == kUsage);
}

TEST_CASE("reproduce runs a canonical experiment") {
  const auto dir = scratch("reproduce");
  const auto r = invoke({"--output", dir.string(), "reproduce", "disjoint-limit"});
  CHECK(r.code == kSuccess);
  CHECK(r.out.find("PASS disjoint-limit.mass_tolerance") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "disjoint-limit" / "masses.csv"));
  CHECK(std::filesystem::exists(dir / "disjoint-limit" / "manifest.json"));
}

TEST_CASE("failing acceptance checks exit with 3") {
  const auto dir = scratch("fail");
  Json doc = small_rate_config(dir / "out");
  doc["acceptance"]["constant_band"] = 1e-9;
  const auto r = invoke({"run", write_config(dir, doc).string()});
  CHECK(r.code == kAcceptanceFail);
  CHECK(r.out.find("FAIL small-rate.constant_band") != std::string::npos);
}

TEST_CASE("fixed-point subcommand") {
  const auto r = invoke({"fixed-point", "--beta", "2", "--B", "0"});
  REQUIRE(r.code == kSuccess);
  const Json obj = Json::parse(r.out);
  CHECK(obj.at("regime") == "Theta2");
  CHECK(obj.at("t").get<double>() == doctest::Approx(0.9575040240772688).epsilon(1e-12));
  const auto csv = invoke({"--format", "csv", "fixed-point", "--beta", "1"});
  CHECK(csv.out.find("regime,Theta3") != std::string::npos);
}

TEST_CASE("exact subcommand") {
  const auto r = invoke({"exact", "curie_weiss", "n=2", "--beta", "1"});
  REQUIRE(r.code == kSuccess);
  const Json obj = Json::parse(r.out);
  const double z = 2 * std::exp(0.5) + 2 * std::exp(-0.5);
  CHECK(obj.at("log_z").get<double>() == doctest::Approx(std::log(z)).epsilon(1e-14));
  const auto dir = scratch("exact");
  REQUIRE(invoke({"--output", dir.string(), "exact", "curie_weiss", "n=20", "--beta", "0.7"}).code == kSuccess);
  CHECK(slurp(dir / "law.csv").rfind("support,prob\n", 0) == 0);
  const Json sidecar = Json::parse(slurp(dir / "law.json"));
  for (const char* key : {"n", "beta", "B", "log_z", "label"}) CHECK(sidecar.contains(key));
}

TEST_CASE("build, diagnose and analyze") {
  const auto dir = scratch("build");
  REQUIRE(invoke({"--output", dir.string(), "build", "regular", "n=20", "d=4", "kind=circulant"}).code == kSuccess);
  const auto matrix = dir / "matrix.txt";
  REQUIRE(std::filesystem::exists(matrix));
  const auto d = invoke({"diagnose", "file", "path=" + matrix.string()});
  REQUIRE(d.code == kSuccess);
  const Json diag = Json::parse(d.out);
  CHECK(diag.at("lambda1").get<double>() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(diag.at("frobenius_sq").get<double>() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(invoke({"diagnose", "regular", "n=5", "d=3"}).code == kValidation);

  const auto a = invoke({"analyze", "curie_weiss", "n=400", "--beta", "0.5"});
  REQUIRE(a.code == kSuccess);
  const Json report = Json::parse(a.out);
  CHECK(report.at("ks").get<double>() * 20 == doctest::Approx(0.28209).epsilon(1e-3));
  CHECK(report.at("regime") == "Theta11");

  const auto sdir = scratch("analyze");
  REQUIRE(invoke({"--output", sdir.string(), "--seed", "5", "sample", "curie_weiss", "n=50", "--beta", "0.5",
                  "--samples", "300"})
              .code == kSuccess);
  const auto s = invoke({"analyze", "--input", (sdir / "samples.csv").string(), "--n", "50", "--beta", "0.5"});
  REQUIRE(s.code == kSuccess);
  CHECK(Json::parse(s.out).at("ks").get<double>() < 0.2);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

}  // TEST_SUITE
