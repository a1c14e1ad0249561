#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kfp/sde_sim.hpp"

namespace kfp {

enum class ExperimentKind {
  constants,
  regime_limit,
  backend_equivalence,
  biane_yor,
  bessel,
  poisson_identity,
  decoupling,
  scaling_fit,
  critical5
};

std::string_view experiment_name(ExperimentKind k);
/// Accepts the hyphenated CLI names ("regime-limit", ...). Throws ConfigError.
ExperimentKind parse_experiment(std::string_view s);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::constants;
  std::optional<double> beta;
  /// Exactly one of epsilon / epsilon_ladder is set for the ε-driven experiments.
  std::optional<double> epsilon;
  std::vector<double> epsilon_ladder;
  std::vector<double> t_marks{1.0};
  std::size_t n_paths = 1000;
  /// Euler steps over the longest horizon; overrides dt when set.
  std::optional<long> n_steps;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  Backend backend = Backend::euler;
  TimeChangeConfig tc{};
  std::string output_dir = ".";
  bool dump_paths = false;
  /// Stable index for biane-yor (defaults to the regime's α when beta is given).
  std::optional<double> alpha;
  /// Bessel dimension (defaults to 1 − β when beta < 1 is given).
  std::optional<double> delta;
  int n_bins = 10;
  unsigned workers = 0;
  /// Named tolerance overrides, e.g. {"ecf_distance": 0.08}.
  std::map<std::string, double> tolerances;
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string field;
  std::string message;
};

/// Parameter and regime cross-checks. Never throws.
std::vector<Diagnostic> validate(const ExperimentConfig& cfg);

/// One pass/fail line of an experiment.
struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunOutcome {
  /// 0 all checks pass, 1 some check failed, 2 invalid config, 3 runtime error.
  int exit_code = 0;
  nlohmann::json summary;
  std::vector<Check> checks;
  /// Set for exit codes 2 and 3.
  nlohmann::json error;
};

/// Runs the experiment. With `write_files` the summary (or error.json) and the
/// optional CSV dumps land in cfg.output_dir.
RunOutcome run(const ExperimentConfig& cfg, bool write_files = true);

/// Default tolerance for `name` in this config's regime, after overrides.
double tolerance(const ExperimentConfig& cfg, const std::string& name);

/// Config echo (every field, no timestamp).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

std::string software_version();

}  // namespace kfp
