// Acceptance suite. One PASS/FAIL line per criterion; sub-checks are indented below it.
// Usage: kfp_acceptance [--criterion N]... [--workers W]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kfp/experiments.hpp"
#include "kfp/force_model.hpp"
#include "kfp/io.hpp"
#include "kfp/path_engine.hpp"

using namespace kfp;
namespace fs = std::filesystem;

namespace {

unsigned g_workers = 0;

struct Line {
  std::string name;
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<std::vector<Line>()> body;
};

ExperimentConfig cfg(ExperimentKind k, std::optional<double> beta, std::uint64_t seed) {
  ExperimentConfig c;
  c.experiment = k;
  c.beta = beta;
  c.seed = seed;
  c.workers = g_workers;
  return c;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Runs the experiment in memory and turns each of its checks into a line.
std::vector<Line> lines_of(const std::string& prefix, const ExperimentConfig& c) {
  const auto o = run(c, false);
  std::vector<Line> out;
  if (o.exit_code >= 2) {
    out.push_back({prefix + " run", false, o.error.dump()});
    return out;
  }
  for (const auto& ch : o.checks) {
    std::string d = "value " + fmt(ch.value) + " tol " + fmt(ch.tolerance);
    if (!ch.detail.empty()) d += " (" + ch.detail + ")";
    out.push_back({prefix + " " + ch.name, ch.pass, d});
  }
  return out;
}

void append(std::vector<Line>& a, std::vector<Line> b) { a.insert(a.end(), b.begin(), b.end()); }

std::vector<Line> operator+(std::vector<Line> a, std::vector<Line> b) {
  append(a, std::move(b));
  return a;
}

std::vector<Line> constants() {
  return lines_of("beta=5", cfg(ExperimentKind::constants, 5.0, 1)) +
         lines_of("beta=2", cfg(ExperimentKind::constants, 2.0, 1));
}

std::vector<Line> poisson() {
  auto c = cfg(ExperimentKind::poisson_identity, 2.0, 2);
  c.dt = 1e-3;
  c.n_paths = 20000;
  c.t_marks = {1.0, 5.0};
  return lines_of("beta=2", c);
}

std::vector<Line> backends() {
  std::vector<Line> out;
  for (double b : {0.5, 2.0, 3.0, 6.0}) {
    auto c = cfg(ExperimentKind::backend_equivalence, b, 3);
    c.epsilon = 1e-2;
    c.n_paths = 5000;
    append(out, lines_of("beta=" + fmt(b), c));
  }
  return out;
}

std::vector<Line> normal_regime() {
  auto c = cfg(ExperimentKind::regime_limit, 7.0, 4);
  c.epsilon = 1e-3;
  c.backend = Backend::timechange;
  c.n_paths = 10000;
  auto out = lines_of("beta=7", c);
  std::erase_if(out, [](const Line& l) { return l.name.find("ecf_distance") != std::string::npos; });
  return out;
}

std::vector<Line> stable_regime() {
  auto c = cfg(ExperimentKind::regime_limit, 2.0, 5);
  c.epsilon_ladder = {1e-2, 1e-3, 1e-4};
  c.n_paths = 10000;
  return lines_of("beta=2", c);
}

std::vector<Line> critical_stable() {
  auto c = cfg(ExperimentKind::regime_limit, 1.0, 6);
  c.epsilon_ladder = {1e-2, 1e-3, 1e-4};
  c.n_paths = 10000;
  return lines_of("beta=1", c);
}

std::vector<Line> critical_gaussian() {
  auto c = cfg(ExperimentKind::critical5, 5.0, 7);
  c.epsilon_ladder = {1e-3, 1e-4};
  c.n_paths = 10000;
  return lines_of("beta=5", c);
}

std::vector<Line> biane_yor() {
  auto c = cfg(ExperimentKind::biane_yor, std::nullopt, 8);
  c.alpha = 2.0 / 3.0;
  c.t_marks = {0.5, 1.0};
  c.n_paths = 5000;
  auto out = lines_of("alpha=2/3", c);
  bool has_incr = false;
  for (const auto& l : out) has_incr = has_incr || l.name.find("increment_exchangeability") != std::string::npos;
  if (!has_incr) out.push_back({"alpha=2/3 increment_exchangeability", false, "not evaluated"});
  return out;
}

std::vector<Line> bessel() {
  auto g = cfg(ExperimentKind::bessel, std::nullopt, 9);
  g.delta = 0.5;
  g.n_paths = 10000;
  auto out = lines_of("delta=0.5", g);
  auto k = cfg(ExperimentKind::bessel, std::nullopt, 10);
  k.delta = 0.5;
  k.epsilon = 1e-3;
  k.backend = Backend::timechange;
  k.n_paths = 5000;
  auto kin = lines_of("delta=0.5 eps=1e-3", k);
  std::erase_if(kin, [](const Line& l) { return l.name.find("kinetic") == std::string::npos && l.name.find(" run") == std::string::npos; });
  append(out, kin);
  return out;
}

std::vector<Line> scaling() {
  std::vector<Line> out;
  const std::vector<double> ladder{1e-2, 3e-3, 1e-3, 3e-4, 1e-4};
  for (double b : {7.0, 2.0, 0.5}) {
    auto c = cfg(ExperimentKind::scaling_fit, b, 11);
    c.epsilon_ladder = ladder;
    c.n_paths = 2000;
    if (b < 1.0) c.backend = Backend::timechange;
    append(out, lines_of("beta=" + fmt(b), c));
  }
  return out;
}

std::vector<Line> decoupling() {
  auto c = cfg(ExperimentKind::decoupling, 6.0, 12);
  c.epsilon = 1e-3;
  c.n_paths = 5000;
  return lines_of("beta=6", c);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Line> infrastructure() {
  std::vector<Line> out;

  {
    RngStream r(13, 0);
    const auto p = brownian_path(1.0, 1000000, r);
    auto f = [](double w) { return std::exp(-w * w); };
    const double direct = occupation_integral(p, f);
    std::vector<double> levels;
    const double da = 0.01;
    for (int i = -500; i <= 500; ++i) levels.push_back(i * da);
    const auto L = local_time_field(p, levels, da);
    double via = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) via += da * f(levels[i]) * L[i];
    const double rel = std::abs(via / direct - 1.0);
    out.push_back({"occupation_formula", rel <= 0.03, "rel " + fmt(rel) + " tol 0.03"});
  }

  {
    RngStream r(14, 0);
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      TimeChangeMap m;
      const int n = 2 + static_cast<int>(30 * r.uniform());
      double t = 0.0, a = 0.0;
      for (int i = 0; i < n; ++i) {
        m.grid_times.push_back(t);
        m.A_values.push_back(a);
        t += 0.01 + r.uniform();
        a += r.uniform() < 0.3 ? 0.0 : r.exponential();
      }
      m.inverse_kind = trial % 2 ? InverseKind::strict : InverseKind::right_continuous_generalized;
      auto A = [&](double x) {
        auto it = std::upper_bound(m.grid_times.begin(), m.grid_times.end(), x);
        if (it == m.grid_times.end()) return m.A_values.back();
        const std::size_t j = it - m.grid_times.begin();
        const double w = (x - m.grid_times[j - 1]) / (m.grid_times[j] - m.grid_times[j - 1]);
        return m.A_values[j - 1] + w * (m.A_values[j] - m.A_values[j - 1]);
      };
      bool ok = true;
      for (int k = 0; k < 20; ++k) {
        const double s = m.A_values.back() * r.uniform();
        const double u = generalized_inverse(m, s);
        ok = ok && std::abs(A(u) - s) <= 1e-9 * (1.0 + s);
        const double left = u - 1e-7;
        if (left > 0.0) ok = ok && (m.inverse_kind == InverseKind::strict ? A(left) < s : A(left) <= s + 1e-9);
      }
      bad += !ok;
    }
    out.push_back({"generalized_inverse_inequalities", bad == 0, std::to_string(bad) + " of 1000 maps violate"});
  }

  {
    const auto root = fs::temp_directory_path() / "kfp_acceptance_determinism";
    fs::remove_all(root);
    std::vector<std::string> texts;
    for (int rep = 0; rep < 2; ++rep) {
      for (auto k : {ExperimentKind::regime_limit, ExperimentKind::biane_yor}) {
        auto c = cfg(k, 3.0, 15);
        c.epsilon = 0.05;
        c.n_paths = 500;
        c.t_marks = {0.5, 1.0};
        c.dump_paths = true;
        c.output_dir = (root / (std::to_string(rep) + std::string(experiment_name(k)))).string();
        const auto o = run(c);
        if (o.exit_code >= 2) throw std::runtime_error(o.error.dump());
        auto j = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "summary.json"));
        j.erase("timestamp");
        texts.push_back(j.dump(2) + slurp(fs::path(c.output_dir) / "samples.csv"));
      }
    }
    fs::remove_all(root);
    const bool same = texts[0] == texts[2] && texts[1] == texts[3];
    out.push_back({"determinism_byte_equality", same, "summary.json (timestamp removed) and samples.csv"});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only.push_back(std::atoi(argv[++i]));
    } else if (a == "--workers" && i + 1 < argc) {
      g_workers = static_cast<unsigned>(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]... [--workers W]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> all{
      {1, "constants: sigma_5^2 two routes, kappa_1 = pi", 1.0, constants},
      {2, "Poisson identity E l(V_t) = t", 120.0, poisson},
      {3, "backend law equality", 600.0, backends},
      {4, "normal regime beta=7", 600.0, normal_regime},
      {5, "stable regime beta=2", 1200.0, stable_regime},
      {6, "critical stable beta=1", 1200.0, critical_stable},
      {7, "critical Gaussian beta=5", 1200.0, critical_gaussian},
      {8, "Biane-Yor alpha=2/3", 600.0, biane_yor},
      {9, "Bessel delta=0.5", 900.0, bessel},
      {10, "scaling exponents", 900.0, scaling},
      {11, "decoupling beta=6", 600.0, decoupling},
      {12, "infrastructure invariants", 600.0, infrastructure},
  };

  bool all_pass = true;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Line> lines;
    try {
      lines = c.body();
    } catch (const std::exception& e) {
      lines.push_back({"exception", false, e.what()});
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    lines.push_back({"time_budget", secs <= c.budget_s, fmt(secs) + " s of " + fmt(c.budget_s) + " s"});
    bool pass = !lines.empty();
    for (const auto& l : lines) pass = pass && l.pass;
    all_pass = all_pass && pass;
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", c.id, c.title);
    for (const auto& l : lines) {
      std::printf("    %s %s: %s\n", l.pass ? "ok  " : "FAIL", l.name.c_str(), l.detail.c_str());
    }
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
