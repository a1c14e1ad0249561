#include "kfp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "kfp/error.hpp"
#include "kfp/force_model.hpp"
#include "kfp/io.hpp"
#include "kfp/limit_lab.hpp"
#include "kfp/parallel.hpp"
#include "kfp/stat_suite.hpp"

#ifndef KFP_VERSION
#define KFP_VERSION "0.0.0"
#endif

namespace kfp {

namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, std::string_view> kNames[] = {
    {ExperimentKind::constants, "constants"},
    {ExperimentKind::regime_limit, "regime-limit"},
    {ExperimentKind::backend_equivalence, "backend-equivalence"},
    {ExperimentKind::biane_yor, "biane-yor"},
    {ExperimentKind::bessel, "bessel"},
    {ExperimentKind::poisson_identity, "poisson-identity"},
    {ExperimentKind::decoupling, "decoupling"},
    {ExperimentKind::scaling_fit, "scaling-fit"},
    {ExperimentKind::critical5, "critical5"},
};

// Stream purposes; each ensemble of an experiment draws from its own purpose.
enum Purpose : std::uint32_t {
  kMain = 1,
  kSecondary = 2,
  kReference = 3,
  kLadderBase = 100,
};

bool needs_beta(ExperimentKind k) {
  return k != ExperimentKind::biane_yor && k != ExperimentKind::bessel;
}

bool uses_epsilon(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::regime_limit:
    case ExperimentKind::backend_equivalence:
    case ExperimentKind::decoupling:
    case ExperimentKind::scaling_fit:
    case ExperimentKind::critical5:
      return true;
    default:
      return false;
  }
}

std::vector<double> epsilons_of(const ExperimentConfig& c) {
  if (!c.epsilon_ladder.empty()) {
    auto e = c.epsilon_ladder;
    std::sort(e.begin(), e.end(), std::greater<>());
    return e;
  }
  if (c.epsilon) return {*c.epsilon};
  return {};
}

double dt_of(const ExperimentConfig& c, double horizon) {
  if (c.n_steps) return horizon / static_cast<double>(*c.n_steps);
  return c.dt.value_or(0.01);
}

SimulationConfig sim_of(const ExperimentConfig& c, double horizon) {
  SimulationConfig s;
  s.backend = c.backend;
  s.dt = dt_of(c, horizon);
  s.tc = c.tc;
  s.workers = c.workers;
  return s;
}

double max_mark(const ExperimentConfig& c) { return *std::max_element(c.t_marks.begin(), c.t_marks.end()); }

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Runner {
 public:
  explicit Runner(const ExperimentConfig& c) : c_(c) {}

  void add(std::string name, bool pass, double value, double tol, std::string detail = {}) {
    checks_.push_back({std::move(name), pass, value, tol, std::move(detail)});
  }
  void add_report(const std::string& name, const TestReport& r, const std::string& detail = {}) {
    add(name, r.passed(), r.statistic, r.level == 0.01 ? r.critical_value_1pct : r.critical_value_5pct, detail);
  }

  std::filesystem::path out(const std::string& file) const { return std::filesystem::path(c_.output_dir) / file; }
  bool dumping() const { return c_.dump_paths && write_; }

  json results = json::object();
  std::vector<Check> checks_;
  const ExperimentConfig& c_;
  bool write_ = true;
};

EnsembleStreams streams(const ExperimentConfig& c, std::uint32_t purpose) { return {*c.seed, purpose}; }

std::string tag(const char* what, double v) { return std::string(what) + "=" + format_double(v); }

// ----------------------------------------------------------------------------

void run_constants(Runner& r, const ForceModel& m, const RegimeSpec& reg) {
  const auto& c = r.c_;
  json j;
  j["c_beta"] = reg.c_beta;
  if (m.beta() > 1.0) j["c_beta_exp_sinh"] = c_beta_exp_sinh(m);
  if (c.epsilon) {
    j["epsilon"] = *c.epsilon;
    j["a_eps"] = reg.a_eps(*c.epsilon);
    j["rate_position"] = reg.rate_position(*c.epsilon);
    j["rate_velocity"] = reg.rate_velocity(*c.epsilon);
  }
  if (m.beta() == 5.0) {
    const double c5 = c_beta_exp_sinh(m);
    const double s2 = *reg.sigma_beta * *reg.sigma_beta;
    const double s2_alt = 4.0 * c5 / 27.0;
    const double rel = std::abs(s2 / s2_alt - 1.0);
    j["sigma5_sq_from_c5_exp_sinh"] = s2_alt;
    r.add("sigma5_sq_two_routes", rel <= tolerance(c, "c5_rel"), rel, tolerance(c, "c5_rel"),
          "sigma_5^2 vs 4 c_5/27 with c_5 from exp-sinh");
  }
  if (reg.alpha && *reg.alpha == 1.0) {
    const double d = std::abs(kappa_alpha(1.0) - std::numbers::pi);
    r.add("kappa_1_equals_pi", d <= tolerance(c, "kappa1_abs"), d, tolerance(c, "kappa1_abs"));
  }
  r.results = j;
}

std::function<double(double)> limit_cf(const RegimeSpec& reg, double t) {
  const double s = reg.sigma_beta.value_or(0.0);
  if (reg.regime == Regime::NormalDiffusive || reg.regime == Regime::CriticalGaussian) {
    return [s, t](double xi) { return std::exp(-0.5 * s * s * t * xi * xi); };
  }
  const double a = *reg.alpha;
  return [s, t, a](double xi) { return std::exp(-t * std::pow(std::abs(s * xi), a)); };
}

void dump_ensemble(CsvWriter& w, const RescaledEnsemble& e) {
  for (std::size_t i = 0; i < e.n_paths; ++i) {
    for (std::size_t j = 0; j < e.t_marks.size(); ++j) {
      w.row({static_cast<double>(i), e.epsilon, e.t_marks[j], e.x_at(i, j), e.v_at(i, j)});
    }
  }
}

void run_regime_limit(Runner& r, const ForceModel& m, const RegimeSpec& reg) {
  const auto& c = r.c_;
  const auto eps = epsilons_of(c);
  const double T = max_mark(c);
  const std::size_t jT = std::max_element(c.t_marks.begin(), c.t_marks.end()) - c.t_marks.begin();
  std::vector<RescaledEnsemble> ens;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    ens.push_back(rescale_ensemble(m, reg, eps[k], c.t_marks, c.n_paths, sim_of(c, T / eps[k]),
                                   streams(c, kLadderBase + static_cast<std::uint32_t>(k))));
  }
  std::unique_ptr<CsvWriter> dump;
  if (r.dumping()) {
    dump = std::make_unique<CsvWriter>(r.out("samples.csv"), std::vector<std::string>{"path_id", "epsilon", "t", "x", "v"});
    for (const auto& e : ens) dump_ensemble(*dump, e);
  }
  const auto& fine = ens.back();
  json per_eps = json::array();

  if (reg.regime == Regime::IntegratedBessel) {
    const auto b = bessel_ensemble({*reg.delta}, c.t_marks, c.n_paths, streams(c, kReference),
                                   {c.tc.kappa, 1e-3, c.tc.refine_depth, c.workers});
    for (const auto& e : ens) {
      json row = {{"epsilon", e.epsilon}};
      for (std::size_t j = 0; j < c.t_marks.size(); ++j) {
        const auto kv = ks_two_sample(e.v_column(j), b.U_column(j), 0.01);
        const auto kx = ks_two_sample(e.x_column(j), b.integral_column(j), 0.01);
        row["t=" + format_double(c.t_marks[j])] = {{"ks_v", kv}, {"ks_x", kx}};
        if (&e == &fine) {
          r.add_report("ks_v_vs_bessel", kv, tag("t", c.t_marks[j]));
          r.add_report("ks_x_vs_integrated_bessel", kx, tag("t", c.t_marks[j]));
        }
      }
      per_eps.push_back(row);
    }
    r.results["per_epsilon"] = per_eps;
    return;
  }

  const auto grid = default_xi_grid(fine.x_column(jT));
  std::vector<double> dist_T;
  for (const auto& e : ens) {
    json row = {{"epsilon", e.epsilon}, {"snap_error", e.snap_error}};
    double dmax = 0.0;
    for (std::size_t j = 0; j < c.t_marks.size(); ++j) {
      const auto col = e.x_column(j);
      const auto g = ecf(col, grid);
      const double d = ecf_distance(g, limit_cf(reg, c.t_marks[j]));
      dmax = std::max(dmax, d);
      json tj = {{"ecf_distance", d}, {"iqr", iqr(col)}, {"ecf", g}};
      if (reg.regime == Regime::NormalDiffusive || reg.regime == Regime::CriticalGaussian) {
        double s = 0.0, s2 = 0.0;
        for (double x : col) {
          s += x;
          s2 += x * x;
        }
        const double n = static_cast<double>(col.size());
        const double var = (s2 - s * s / n) / (n - 1.0);
        const double target = *reg.sigma_beta * *reg.sigma_beta * c.t_marks[j];
        tj["variance"] = var;
        tj["variance_target"] = target;
        if (&e == &fine) {
          const double rel = std::abs(var / target - 1.0);
          r.add("variance", rel <= tolerance(c, "variance_rel"), rel, tolerance(c, "variance_rel"),
                tag("t", c.t_marks[j]));
          const double sd = std::sqrt(target);
          const auto ks = ks_one_sample(col, [sd](double x) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); }, 0.05);
          tj["gaussian_ks"] = ks;
          r.add_report("gaussian_ks", ks, tag("t", c.t_marks[j]));
        }
      }
      row["t=" + format_double(c.t_marks[j])] = tj;
      if (j == jT) dist_T.push_back(d);
    }
    row["ecf_distance_max"] = dmax;
    per_eps.push_back(row);
  }
  r.results["xi_grid"] = grid;
  r.results["per_epsilon"] = per_eps;
  r.results["ecf_distance_at_T"] = dist_T;
  r.add("ecf_distance", dist_T.back() <= tolerance(c, "ecf_distance"), dist_T.back(), tolerance(c, "ecf_distance"),
        tag("epsilon", fine.epsilon) + " " + tag("t", T));
  if (eps.size() > 1) {
    bool dec = true;
    for (std::size_t k = 1; k < dist_T.size(); ++k) dec = dec && dist_T[k] < dist_T[k - 1];
    r.add("ecf_distance_decreasing", dec, dist_T.back(), 0.0, "strictly decreasing along the epsilon ladder");
  }
  if (reg.alpha) {
    const double h = hill_tail_index(fine.x_column(jT), tolerance(c, "hill_k_fraction"));
    r.results["hill_index"] = h;
    // Reported only for the critical stable regime.
    if (reg.regime == Regime::Stable) {
      r.add("hill_index", std::abs(h - *reg.alpha) <= tolerance(c, "hill"), h, tolerance(c, "hill"),
            tag("alpha", *reg.alpha));
    }
  }
}

void run_backend_equivalence(Runner& r, const ForceModel& m, const RegimeSpec& reg) {
  const auto& c = r.c_;
  const double eps = *c.epsilon;
  auto se = sim_of(c, max_mark(c) / eps);
  se.backend = Backend::euler;
  auto st = se;
  st.backend = Backend::timechange;
  const auto a = rescale_ensemble(m, reg, eps, c.t_marks, c.n_paths, se, streams(c, kMain));
  const auto b = rescale_ensemble(m, reg, eps, c.t_marks, c.n_paths, st, streams(c, kSecondary));
  json per_t = json::array();
  for (std::size_t j = 0; j < c.t_marks.size(); ++j) {
    const auto kv = ks_two_sample(a.v_column(j), b.v_column(j), 0.01);
    const auto kx = ks_two_sample(a.x_column(j), b.x_column(j), 0.01);
    per_t.push_back({{"t", c.t_marks[j]}, {"ks_v", kv}, {"ks_x", kx}});
    r.add_report("ks_v", kv, tag("t", c.t_marks[j]));
    r.add_report("ks_x", kx, tag("t", c.t_marks[j]));
  }
  r.results = {{"epsilon", eps}, {"euler_dt", se.dt}, {"timechange_kappa", c.tc.kappa}, {"per_t", per_t}};
  if (r.dumping()) {
    CsvWriter w(r.out("samples.csv"), {"path_id", "backend", "t", "x", "v"});
    for (const auto* e : {&a, &b}) {
      for (std::size_t i = 0; i < e->n_paths; ++i) {
        for (std::size_t j = 0; j < c.t_marks.size(); ++j) {
          w.row({std::to_string(i), std::string(backend_name(e->backend)), format_double(c.t_marks[j]),
                 format_double(e->x_at(i, j)), format_double(e->v_at(i, j))});
        }
      }
    }
  }
}

void run_biane_yor(Runner& r, double alpha) {
  const auto& c = r.c_;
  LocalTimeLabConfig lc;
  lc.kappa = c.tc.kappa;
  lc.refine_depth = c.tc.refine_depth;
  lc.workers = c.workers;
  const auto s = stable_from_localtime(alpha, c.t_marks, c.n_paths, streams(c, kMain), lc);
  const double kap = kappa_alpha(alpha);
  const StableSpec spec{alpha, std::pow(kap, 1.0 / alpha)};
  json per_t = json::array();
  for (std::size_t j = 0; j < c.t_marks.size(); ++j) {
    const double t = c.t_marks[j];
    if (t == 0.0) continue;
    RngStream rng(*c.seed, make_stream_id(kReference, j));
    const auto direct = sample_stable_direct(spec, t, c.n_paths, rng);
    const auto col = s.column(j);
    const auto ks = ks_two_sample(col, direct, 0.01);
    // scale^α from the ECF at ξ = 1/scale.
    const auto e = ecf(col, {1.0 / spec.scale});
    const double fit = -std::log(std::max(e.real_part[0], 1e-300)) / t * kap;
    per_t.push_back({{"t", t}, {"ks_vs_direct", ks}, {"kappa_alpha_fit", fit}});
    r.add_report("ks_vs_direct", ks, tag("t", t));
  }
  json j = {{"alpha", alpha}, {"kappa_alpha", kap}, {"unconverged_ladders", s.unconverged}, {"per_t", per_t}};
  // Equal-length increments of a Lévy process share a law.
  for (std::size_t j1 = 0; j1 + 1 < c.t_marks.size(); ++j1) {
    const double t1 = c.t_marks[j1], t2 = c.t_marks[j1 + 1];
    if (!(t1 > 0.0) || std::abs(t2 - 2.0 * t1) > 1e-12 * t2) continue;
    std::vector<double> first = s.column(j1), incr(c.n_paths);
    for (std::size_t i = 0; i < c.n_paths; ++i) incr[i] = s.at(i, j1 + 1) - s.at(i, j1);
    const auto ks = ks_two_sample(first, incr, 0.05);
    j["increment_ks"] = ks;
    r.add_report("increment_exchangeability", ks, tag("t1", t1) + " " + tag("t2", t2));
    break;
  }
  r.results = j;
  if (r.dumping()) {
    CsvWriter w(r.out("samples.csv"), {"path_id", "t", "value"});
    for (std::size_t i = 0; i < s.n_paths; ++i) {
      for (std::size_t k = 0; k < s.t_marks.size(); ++k) w.row({static_cast<double>(i), s.t_marks[k], s.at(i, k)});
    }
  }
}

void run_bessel(Runner& r, double delta) {
  const auto& c = r.c_;
  BesselLabConfig bc;
  bc.kappa = c.tc.kappa;
  bc.refine_depth = c.tc.refine_depth;
  bc.workers = c.workers;
  const auto b = bessel_ensemble({delta}, c.t_marks, c.n_paths, streams(c, kMain), bc);
  json per_t = json::array();
  for (std::size_t j = 0; j < c.t_marks.size(); ++j) {
    const double t = c.t_marks[j];
    if (t == 0.0) continue;
    auto sq = b.U_column(j);
    for (auto& u : sq) u *= u;
    const auto ks = ks_one_sample(sq, [&](double x) { return gamma_cdf(0.5 * delta, 2.0 * t, x); }, 0.05);
    per_t.push_back({{"t", t}, {"gamma_ks", ks}});
    r.add_report("gamma_ks", ks, tag("t", t));
  }
  json j = {{"delta", delta}, {"per_t", per_t}};
  if (c.epsilon) {
    const double beta = 1.0 - delta;
    const auto m = ForceModel::canonical(beta);
    const auto reg = regime_classify(m);
    const auto e = rescale_ensemble(m, reg, *c.epsilon, c.t_marks, c.n_paths, sim_of(c, max_mark(c) / *c.epsilon),
                                    streams(c, kSecondary));
    json kin = json::array();
    for (std::size_t k = 0; k < c.t_marks.size(); ++k) {
      if (c.t_marks[k] == 0.0) continue;
      const auto kv = ks_two_sample(e.v_column(k), b.U_column(k), 0.01);
      const auto kx = ks_two_sample(e.x_column(k), b.integral_column(k), 0.01);
      kin.push_back({{"t", c.t_marks[k]}, {"ks_v", kv}, {"ks_x", kx}});
      r.add_report("kinetic_ks_v", kv, tag("t", c.t_marks[k]));
      r.add_report("kinetic_ks_x", kx, tag("t", c.t_marks[k]));
    }
    j["kinetic"] = {{"beta", beta}, {"epsilon", *c.epsilon}, {"backend", backend_name(c.backend)}, {"per_t", kin}};
  }
  r.results = j;
  if (r.dumping()) {
    CsvWriter w(r.out("samples.csv"), {"path_id", "t", "U", "integral"});
    for (std::size_t i = 0; i < b.n_paths; ++i) {
      for (std::size_t k = 0; k < b.t_marks.size(); ++k) {
        const std::size_t at = i * b.t_marks.size() + k;
        w.row({static_cast<double>(i), b.t_marks[k], b.U[at], b.integral[at]});
      }
    }
  }
}

void run_poisson(Runner& r, const ForceModel& m) {
  const auto& c = r.c_;
  const double T = max_mark(c);
  const double dt = dt_of(c, T);
  const std::size_t nm = c.t_marks.size();
  std::vector<long> idx(nm);
  for (std::size_t j = 0; j < nm; ++j) idx[j] = std::lround(c.t_marks[j] / dt);
  const long n_steps = *std::max_element(idx.begin(), idx.end());
  std::vector<double> ell(c.n_paths * nm, 0.0);
  const auto st = streams(c, kMain);
  parallel_for(
      c.n_paths,
      [&](std::size_t i) {
        RngStream rng = st.stream(i);
        euler_stream(m, 0.0, 0.0, dt, n_steps, rng, [&](long k, double v, double) {
          for (std::size_t j = 0; j < nm; ++j) {
            if (idx[j] == k) ell[i * nm + j] = poisson_ell(m, v);
          }
        });
      },
      c.workers);
  json per_t = json::array();
  for (std::size_t j = 0; j < nm; ++j) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < c.n_paths; ++i) {
      s += ell[i * nm + j];
      s2 += ell[i * nm + j] * ell[i * nm + j];
    }
    const double n = static_cast<double>(c.n_paths);
    const double mean = s / n;
    const double se = std::sqrt(std::max(s2 / n - mean * mean, 0.0) / n);
    const double t = idx[j] * dt;
    const double rel = std::abs(mean / t - 1.0);
    per_t.push_back({{"t", t}, {"mean_ell", mean}, {"std_error", se}, {"ratio", mean / t}});
    r.add("poisson_mean", rel <= tolerance(c, "poisson_rel"), rel, tolerance(c, "poisson_rel"), tag("t", t));
  }
  r.results = {{"dt", dt}, {"per_t", per_t}};
}

void run_decoupling(Runner& r, const ForceModel& m, const RegimeSpec& reg) {
  const auto& c = r.c_;
  const double eps = *c.epsilon;
  const auto e = rescale_ensemble(m, reg, eps, c.t_marks, c.n_paths, sim_of(c, max_mark(c) / eps), streams(c, kMain));
  json per_t = json::array();
  for (std::size_t j = 0; j < c.t_marks.size(); ++j) {
    const auto rep = independence_test(e.x_column(j), e.v_column(j), c.n_bins, &m, 0.01);
    per_t.push_back({{"t", c.t_marks[j]}, {"chi_square", rep.chi_square}, {"bins", rep.bins_used},
                     {"v_marginal_ks", *rep.v_marginal}});
    r.add_report("chi_square_independence", rep.chi_square, tag("t", c.t_marks[j]));
    r.add_report("v_marginal_ks", *rep.v_marginal, tag("t", c.t_marks[j]));
  }
  r.results = {{"epsilon", eps}, {"per_t", per_t}};
  if (r.dumping()) {
    CsvWriter w(r.out("samples.csv"), {"path_id", "epsilon", "t", "x", "v"});
    dump_ensemble(w, e);
  }
}

double expected_slope(const RegimeSpec& reg) {
  switch (reg.regime) {
    case Regime::NormalDiffusive:
    case Regime::CriticalGaussian: return 0.5;
    case Regime::Stable: return 1.0 / *reg.alpha;
    case Regime::CriticalStable:
    case Regime::IntegratedBessel: return 1.5;
  }
  return 0.0;
}

void run_scaling_fit(Runner& r, const ForceModel& m, const RegimeSpec& reg) {
  const auto& c = r.c_;
  const double t = max_mark(c);
  const auto eps = epsilons_of(c);
  const double eps_min = eps.back();
  const auto f = scaling_exponent_fit(m, eps, t, c.n_paths, sim_of(c, t / eps_min), streams(c, kLadderBase));
  const double want = expected_slope(reg);
  r.results = {{"t", t}, {"fit", f}, {"expected_slope", want}};
  r.add("slope", std::abs(f.slope - want) <= tolerance(c, "slope"), f.slope, tolerance(c, "slope"),
        tag("expected", want));
}

void run_critical5(Runner& r, const ForceModel& m, const RegimeSpec& reg) {
  const auto& c = r.c_;
  const double t = max_mark(c);
  const auto eps = epsilons_of(c);
  const double target = *reg.sigma_beta * *reg.sigma_beta * t;
  json per_eps = json::array();
  std::vector<double> rel;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const auto clocks = critical5_ensemble(m, eps[k], t, c.n_paths, sim_of(c, t / eps[k]),
                                           streams(c, kLadderBase + static_cast<std::uint32_t>(k)));
    double s = 0.0, s2 = 0.0;
    for (double x : clocks) {
      s += x;
      s2 += x * x;
    }
    const double n = static_cast<double>(clocks.size());
    const double mean = s / n;
    const double se = std::sqrt(std::max(s2 / n - mean * mean, 0.0) / n);
    rel.push_back(std::abs(mean / target - 1.0));
    per_eps.push_back({{"epsilon", eps[k]}, {"mean_clock", mean}, {"std_error", se}, {"rel_error", rel.back()}});
  }
  r.results = {{"t", t}, {"target", target}, {"per_epsilon", per_eps}};
  r.add("critical5_mean", rel.front() <= tolerance(c, "critical5_rel"), rel.front(), tolerance(c, "critical5_rel"),
        tag("epsilon", eps.front()));
  if (eps.size() > 1) {
    bool dec = true;
    for (std::size_t k = 1; k < rel.size(); ++k) dec = dec && rel[k] < rel[k - 1];
    r.add("critical5_improves", dec, rel.back(), 0.0, "relative error strictly decreasing along the ladder");
  }
}

}  // namespace

std::string_view experiment_name(ExperimentKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view s) {
  for (const auto& [kind, name] : kNames) {
    if (name == s) return kind;
  }
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

std::string software_version() { return KFP_VERSION; }

namespace {

std::optional<double> default_tolerance(const std::string& name, double b) {
  if (name == "ecf_distance") return b == 1.0 ? 0.10 : 0.05;
  if (name == "hill") return 0.15;
  if (name == "hill_k_fraction") return 0.02;
  if (name == "variance_rel") return 0.10;
  if (name == "poisson_rel") return 0.03;
  if (name == "critical5_rel") return 0.25;
  if (name == "c5_rel") return 1e-6;
  if (name == "kappa1_abs") return 1e-10;
  if (name == "slope") {
    if (b >= 5.0) return 0.05;
    if (b >= 1.0) return 0.07;
    return 0.10;
  }
  return std::nullopt;
}

}  // namespace

double tolerance(const ExperimentConfig& cfg, const std::string& name) {
  const auto d = default_tolerance(name, cfg.beta.value_or(0.0));
  if (!d) throw ConfigError("unknown tolerance '" + name + "'");
  if (auto it = cfg.tolerances.find(name); it != cfg.tolerances.end()) return it->second;
  return *d;
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto err = [&](std::string f, std::string m) { d.push_back({Severity::error, std::move(f), std::move(m)}); };
  auto warn = [&](std::string f, std::string m) { d.push_back({Severity::warning, std::move(f), std::move(m)}); };
  const auto k = c.experiment;

  if (!c.seed) err("seed", "a seed is required");
  if (c.beta && !(*c.beta > 0.0 && std::isfinite(*c.beta))) err("beta", "beta must be positive and finite");
  if (needs_beta(k) && !c.beta) err("beta", "this experiment needs beta");
  if (k == ExperimentKind::critical5 && c.beta && *c.beta != 5.0) err("beta", "critical5 applies to beta = 5 only");
  if (k == ExperimentKind::decoupling && c.beta && !(*c.beta > 5.0)) err("beta", "decoupling needs beta > 5");
  if (k == ExperimentKind::scaling_fit && c.epsilon_ladder.empty()) err("epsilon_ladder", "scaling-fit needs a ladder");

  if (c.epsilon && !c.epsilon_ladder.empty()) err("epsilon", "set exactly one of epsilon and epsilon_ladder");
  if (uses_epsilon(k) && !c.epsilon && c.epsilon_ladder.empty()) err("epsilon", "this experiment needs epsilon");
  if ((k == ExperimentKind::backend_equivalence || k == ExperimentKind::decoupling) && !c.epsilon_ladder.empty()) {
    err("epsilon_ladder", "this experiment takes a single epsilon");
  }
  std::vector<double> eps = c.epsilon_ladder;
  if (c.epsilon) eps.push_back(*c.epsilon);
  for (double e : eps) {
    if (!(e > 0.0 && e < 1.0)) err("epsilon", "epsilon must lie in (0, 1)");
  }
  if (c.beta && (*c.beta == 1.0 || *c.beta == 5.0) && !eps.empty()) {
    for (double e : eps) {
      if (!(e < std::exp(-1.0))) {
        warn("epsilon", "|log epsilon| < 1: the log-corrected rate is ill-conditioned");
      }
    }
  }
  if (k == ExperimentKind::scaling_fit && !c.epsilon_ladder.empty()) {
    const auto [lo, hi] = std::minmax_element(c.epsilon_ladder.begin(), c.epsilon_ladder.end());
    if (c.epsilon_ladder.size() < 4 || *hi / *lo < 100.0 * (1.0 - 1e-9)) {
      err("epsilon_ladder", "scaling-fit needs >= 4 epsilons spanning two decades");
    }
  }
  if (c.t_marks.empty()) err("t_marks", "at least one time mark is required");
  for (double t : c.t_marks) {
    if (!(t >= 0.0 && std::isfinite(t))) err("t_marks", "time marks must be nonnegative");
  }
  if (!std::is_sorted(c.t_marks.begin(), c.t_marks.end())) err("t_marks", "time marks must be sorted");
  if (k != ExperimentKind::constants && c.n_paths < 20) err("n_paths", "at least 20 paths are needed for the tests");
  if (k == ExperimentKind::decoupling && c.n_paths < 1000) err("n_paths", "decoupling needs at least 1000 paths");
  if (c.n_steps && *c.n_steps < 1) err("n_steps", "n_steps must be positive");
  if (c.dt && !(*c.dt > 0.0)) err("dt", "dt must be positive");
  if (c.n_steps && c.dt) err("dt", "set at most one of dt and n_steps");
  if (!(c.tc.kappa > 0.0) || !(c.tc.floor_factor > 0.0)) err("kappa", "time-change grid controls must be positive");
  if (c.n_bins < 2) err("n_bins", "need at least 2 bins");
  for (const auto& [name, v] : c.tolerances) {
    if (!default_tolerance(name, 0.0)) err("tolerances", "unknown tolerance '" + name + "'");
    else if (!(v > 0.0 && std::isfinite(v))) err("tolerances", "tolerance '" + name + "' must be positive");
  }
  if (k == ExperimentKind::biane_yor) {
    const std::optional<double> a = c.alpha ? c.alpha
                                    : (c.beta && *c.beta >= 1.0 && *c.beta < 5.0) ? std::optional<double>((*c.beta + 1.0) / 3.0)
                                                                                   : std::nullopt;
    if (!a) err("alpha", "biane-yor needs alpha (or beta in [1, 5))");
    else if (!(*a > 0.0 && *a < 2.0)) err("alpha", "alpha must lie in (0, 2)");
  }
  if (k == ExperimentKind::bessel) {
    const std::optional<double> dl = c.delta ? c.delta : (c.beta && *c.beta < 1.0) ? std::optional<double>(1.0 - *c.beta)
                                                                                   : std::nullopt;
    if (!dl) err("delta", "bessel needs delta (or beta < 1)");
    else if (!(*dl > 0.0 && *dl < 2.0)) err("delta", "delta must lie in (0, 2)");
    else if (c.epsilon && !(*dl < 1.0)) err("delta", "the kinetic comparison needs delta < 1 (beta = 1 - delta > 0)");
  }
  if (k == ExperimentKind::poisson_identity && c.backend != Backend::euler) {
    warn("backend", "poisson-identity always uses the Euler backend");
  }
  return d;
}

json config_to_json(const ExperimentConfig& c) {
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  json j = {{"experiment", experiment_name(c.experiment)},
            {"beta", opt(c.beta)},
            {"epsilon", opt(c.epsilon)},
            {"epsilon_ladder", c.epsilon_ladder},
            {"t_marks", c.t_marks},
            {"n_paths", c.n_paths},
            {"n_steps", opt(c.n_steps)},
            {"dt", opt(c.dt)},
            {"seed", opt(c.seed)},
            {"backend", backend_name(c.backend)},
            {"kappa", c.tc.kappa},
            {"floor_factor", c.tc.floor_factor},
            {"refine_depth", c.tc.refine_depth},
            {"alpha", opt(c.alpha)},
            {"delta", opt(c.delta)},
            {"n_bins", c.n_bins},
            {"dump_paths", c.dump_paths},
            {"tolerances", c.tolerances}};
  return j;
}

RunOutcome run(const ExperimentConfig& cfg, bool write_files) {
  RunOutcome o;
  auto fail = [&](int code, json err) {
    o.exit_code = code;
    o.error = {{"exit_code", code}, {"experiment", experiment_name(cfg.experiment)}, {"error", std::move(err)},
               {"software_version", software_version()}};
    if (write_files) {
      std::error_code ec;
      std::filesystem::create_directories(cfg.output_dir, ec);
      try {
        write_json(std::filesystem::path(cfg.output_dir) / "error.json", o.error);
      } catch (const Error&) {
      }
    }
    return o;
  };

  const auto diags = validate(cfg);
  json dj = json::array();
  bool bad = false;
  for (const auto& d : diags) {
    dj.push_back({{"severity", d.severity == Severity::error ? "error" : "warning"}, {"field", d.field},
                  {"message", d.message}});
    bad = bad || d.severity == Severity::error;
  }
  if (bad) return fail(2, {{"kind", "ConfigError"}, {"message", "invalid configuration"}, {"diagnostics", dj}});

  try {
    if (write_files) std::filesystem::create_directories(cfg.output_dir);
    Runner r(cfg);
    r.write_ = write_files;
    json summary = {{"experiment", experiment_name(cfg.experiment)},
                    {"software_version", software_version()},
                    {"timestamp", iso_timestamp()},
                    {"config", config_to_json(cfg)},
                    {"diagnostics", dj}};
    std::optional<ForceModel> m;
    std::optional<RegimeSpec> reg;
    if (cfg.beta) {
      m = ForceModel::canonical(*cfg.beta);
      reg = regime_classify(*m);
      summary["regime"] = *reg;
    }
    switch (cfg.experiment) {
      case ExperimentKind::constants: run_constants(r, *m, *reg); break;
      case ExperimentKind::regime_limit: run_regime_limit(r, *m, *reg); break;
      case ExperimentKind::backend_equivalence: run_backend_equivalence(r, *m, *reg); break;
      case ExperimentKind::biane_yor:
        run_biane_yor(r, cfg.alpha ? *cfg.alpha : *reg->alpha);
        break;
      case ExperimentKind::bessel: run_bessel(r, cfg.delta ? *cfg.delta : 1.0 - *cfg.beta); break;
      case ExperimentKind::poisson_identity: run_poisson(r, *m); break;
      case ExperimentKind::decoupling: run_decoupling(r, *m, *reg); break;
      case ExperimentKind::scaling_fit: run_scaling_fit(r, *m, *reg); break;
      case ExperimentKind::critical5: run_critical5(r, *m, *reg); break;
    }
    json checks = json::array();
    bool all = true;
    for (const auto& ch : r.checks_) {
      checks.push_back({{"name", ch.name}, {"verdict", ch.pass ? "pass" : "fail"}, {"value", ch.value},
                        {"tolerance", ch.tolerance}, {"detail", ch.detail}});
      all = all && ch.pass;
    }
    summary["results"] = r.results;
    summary["checks"] = checks;
    summary["all_pass"] = all;
    o.summary = summary;
    o.checks = r.checks_;
    o.exit_code = all ? 0 : 1;
    if (write_files) write_json(std::filesystem::path(cfg.output_dir) / "summary.json", summary);
    return o;
  } catch (const Error& e) {
    return fail(3, {{"kind", e.kind()}, {"message", e.what()}});
  } catch (const std::exception& e) {
    return fail(3, {{"kind", "InternalError"}, {"message", e.what()}});
  }
}

}  // namespace kfp
