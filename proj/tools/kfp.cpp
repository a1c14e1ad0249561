// kfp: command line front end for the experiments in kfp/experiments.hpp.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kfp/error.hpp"
#include "kfp/experiments.hpp"
#include "kfp/io.hpp"

namespace {

// A config file holds one flag per line, written as on the command line with
// or without the leading "--" ("beta 3", "--paths=2000", "experiment regime-limit").
std::vector<std::string> read_config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kfp::ConfigError("cannot read config file " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == '=') {
        ch = ' ';
        break;
      }
    }
    std::istringstream ss(line);
    std::string tok;
    bool first = true;
    while (ss >> tok) {
      if (first && tok.rfind("--", 0) != 0) tok = "--" + tok;
      out.push_back(tok);
      first = false;
    }
  }
  return out;
}

void print_outcome(const kfp::RunOutcome& o, const kfp::ExperimentConfig& cfg) {
  if (o.exit_code >= 2) {
    std::cerr << o.error.dump(2) << '\n';
    return;
  }
  for (const auto& c : o.checks) {
    std::printf("%s  %-28s value=%-12s tol=%-10s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                kfp::format_double(c.value).c_str(), kfp::format_double(c.tolerance).c_str(), c.detail.c_str());
  }
  std::printf("summary: %s/summary.json (%s)\n", cfg.output_dir.c_str(), o.exit_code == 0 ? "all pass" : "failures");
}

}  // namespace

int main(int argc, char** argv) {
  kfp::ExperimentConfig cfg;
  std::string experiment, backend = "euler", config_file;
  std::optional<double> beta, epsilon, dt, alpha, delta;
  std::optional<long> steps;
  std::optional<std::uint64_t> seed;
  std::vector<double> ladder, marks;
  std::vector<std::string> tols;

  CLI::App app{"Kinetic Fokker-Planck limit experiments"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.add_option("experiment,--experiment", experiment,
                 "constants | regime-limit | backend-equivalence | biane-yor | bessel | poisson-identity | "
                 "decoupling | scaling-fit | critical5");
  app.add_option("--config", config_file, "Flat key-value file of flags; command line flags override it");
  app.add_option("--beta", beta, "Force exponent beta > 0");
  app.add_option("--epsilon", epsilon, "Scale parameter");
  app.add_option("--epsilon-ladder", ladder, "Comma separated epsilons")->delimiter(',')->multi_option_policy(
      CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--t-marks", marks, "Comma separated rescaled times (default 1)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--paths", cfg.n_paths, "Number of paths");
  app.add_option("--steps", steps, "Euler steps over the longest horizon");
  app.add_option("--dt", dt, "Euler step (default 0.01)");
  app.add_option("--seed", seed, "Master seed (required)");
  app.add_option("--backend", backend, "euler | timechange");
  app.add_option("--kappa", cfg.tc.kappa, "Relative step of the time-change walker");
  app.add_option("--alpha", alpha, "Stable index for biane-yor");
  app.add_option("--delta", delta, "Bessel dimension");
  app.add_option("--bins", cfg.n_bins, "Bins per axis for the independence test");
  app.add_option("--workers", cfg.workers, "Worker threads (default: KFP_THREADS or all cores)");
  app.add_option("--tol", tols, "Tolerance override name=value (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--out", cfg.output_dir, "Output directory");
  app.add_flag("--dump-paths", cfg.dump_paths, "Write per-path samples as CSV");

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    // First pass only to find --config.
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a.rfind("--config=", 0) == 0) config_file = a.substr(9);
      if (a == "--config" && i > 0) config_file = args[i - 1];
    }
    if (!config_file.empty()) {
      std::set<std::string> given;
      for (const auto& a : args) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
      }
      std::vector<std::string> file;
      bool skipping = false;
      for (auto& tok : read_config_tokens(config_file)) {
        if (tok.rfind("--", 0) == 0) skipping = given.count(tok.substr(0, tok.find('='))) > 0;
        if (!skipping) file.push_back(std::move(tok));
      }
      // CLI11 consumes the vector from the back.
      args.insert(args.end(), file.rbegin(), file.rend());
    }
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const kfp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (experiment.empty()) throw kfp::ConfigError("missing experiment name");
    cfg.experiment = kfp::parse_experiment(experiment);
    cfg.backend = kfp::parse_backend(backend);
    for (const auto& t : tols) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw kfp::ConfigError("--tol expects name=value, got '" + t + "'");
      cfg.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  cfg.beta = beta;
  cfg.epsilon = epsilon;
  cfg.epsilon_ladder = ladder;
  if (!marks.empty()) cfg.t_marks = marks;
  cfg.n_steps = steps;
  cfg.dt = dt;
  cfg.seed = seed;
  cfg.alpha = alpha;
  cfg.delta = delta;

  const auto o = kfp::run(cfg);
  print_outcome(o, cfg);
  return o.exit_code;
}
