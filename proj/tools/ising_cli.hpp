#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ising/coupling.hpp"
#include "ising/exact.hpp"
#include "ising/meanfield.hpp"
#include "ising/sampler.hpp"

namespace ising::cli {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolName = "ising";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kUsage = 1, kValidation = 2, kAcceptanceFail = 3 };

/// Validated experiment description. `coupling`, `analysis` and
/// `acceptance` keep their JSON form; defaults (seeds included) are filled
/// in so that `resolved` alone reproduces the run.
struct ExperimentConfig {
  std::string name;
  std::string experiment;
  Json coupling;
  ModelParams params;
  std::optional<SamplerConfig> sampler;
  Json analysis = Json::object();
  Json acceptance = Json::object();
  std::filesystem::path output_dir;
  Json resolved;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<std::filesystem::path> output_dir;  ///< overrides the config's output_dir
  std::filesystem::path base_dir = ".";             ///< resolves relative matrix-file paths
};

/// Validates a config document. Errors are InvalidArgument whose field is
/// the dotted path of the offending entry, e.g. `coupling.p`.
ExperimentConfig parse_config(const Json& doc, const RunOptions& options);

/// Checks a builder spec and fills defaulted fields (seed, kind, ...).
Json resolve_coupling(const Json& spec, const std::string& path, std::uint64_t default_seed);
CouplingMatrix build_coupling(const Json& spec, const std::string& path, const std::filesystem::path& base_dir);
/// Exact magnetization law, using the sufficient statistic when the spec
/// allows it (curie_weiss, blocked) and brute force otherwise.
MagnetizationLaw exact_law(const Json& spec, const ModelParams& p, const std::filesystem::path& base_dir);
/// Copy of a size-indexed spec (curie_weiss, complete, ...) with `n` replaced.
Json with_size(const Json& spec, int n);

/// Runs an experiment, writes its files and manifest.json, prints one
/// PASS/FAIL line per acceptance check. Returns an ExitCode.
int run_experiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& out);

/// Names accepted by `reproduce`, and their embedded canonical configs.
const std::vector<std::string>& canonical_names();
std::optional<std::string_view> canonical_config(std::string_view name);
std::string_view config_schema();

/// 64-bit FNV-1a, printed as 16 hex digits in manifests.
std::uint64_t fnv1a(std::string_view bytes);

/// Full command-line entry point; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ising::cli
