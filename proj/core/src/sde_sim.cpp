#include "kfp/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kfp/error.hpp"
#include "kfp/parallel.hpp"

namespace kfp {

std::string_view backend_name(Backend b) { return b == Backend::euler ? "euler" : "timechange"; }

Backend parse_backend(std::string_view s) {
  if (s == "euler") return Backend::euler;
  if (s == "timechange") return Backend::timechange;
  throw ConfigError("unknown backend '" + std::string(s) + "' (expected euler or timechange)");
}

KineticPath simulate_euler(const ForceModel& m, double v0, double x0, double horizon, long n_steps, RngStream& rng) {
  if (n_steps < 1) throw DomainError("simulate_euler needs n_steps >= 1");
  if (!(horizon > 0.0)) throw DomainError("simulate_euler needs a positive horizon");
  KineticPath p;
  p.backend = Backend::euler;
  p.origin = rng.provenance();
  p.times.resize(n_steps + 1);
  p.V.resize(n_steps + 1);
  p.X.resize(n_steps + 1);
  const double dt = horizon / static_cast<double>(n_steps);
  p.times[0] = 0.0;
  p.V[0] = v0;
  p.X[0] = x0;
  euler_stream(m, v0, x0, dt, n_steps, rng, [&](long k, double v, double x) {
    p.times[k] = k * dt;
    p.V[k] = v;
    p.X[k] = x;
  });
  p.times[n_steps] = horizon;
  return p;
}

namespace {

// Trapezoid integrand of the kinetic time change: clock ε a⁻²σ⁻²(w/a),
// functionals a⁻²φ(w/a) and, for β = 5, ε a⁻²|log ε|⁻¹ψ(w/a).
struct KineticIntegrand {
  static constexpr std::size_t N = 2;
  struct Point {
    double c, x, q;
  };
  FastScale fs;
  double inv_a, clock_scale, x_scale, psi_scale;
  bool with_psi;

  Point point(double w) const {
    const double z = w * inv_a;
    double s2, ph;
    fs.speed_and_phi(z, s2, ph);
    return {clock_scale * s2, x_scale * ph, with_psi ? psi_scale * fs.psi(z) : 0.0};
  }
  Segment<2> segment(double, const Point& p0, double, const Point& p1, double du) const {
    Segment<2> s;
    const double h = 0.5 * du;
    s.clock = h * (p0.c + p1.c);
    s.f[0] = h * (p0.x + p1.x);
    s.f[1] = h * (p0.q + p1.q);
    return s;
  }
};

struct TimeChangeRun {
  std::vector<MarkRecord<2>> marks;
  double a;
};

TimeChangeRun run_timechange(const ForceModel& m, double epsilon, const std::vector<double>& t_marks, RngStream& rng,
                             const TimeChangeConfig& cfg, bool with_psi) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const RegimeSpec r = regime_classify(m);
  const double a = cfg.a_override > 0.0 ? cfg.a_override : r.a_eps(epsilon);
  KineticIntegrand in{fast_scale(m), 1.0 / a, epsilon / (a * a), 1.0 / (a * a), 0.0, with_psi};
  if (with_psi) in.psi_scale = epsilon / (a * a * std::abs(std::log(epsilon)));
  WalkerConfig wc;
  wc.kappa = cfg.kappa;
  wc.floor = cfg.floor_factor * a;
  wc.refine_depth = cfg.refine_depth;
  return {walk_time_change(in, t_marks, wc, rng), a};
}

}  // namespace

KineticPath simulate_timechange(const ForceModel& m, double epsilon, const std::vector<double>& t_marks,
                                RngStream& rng, const TimeChangeConfig& cfg) {
  KineticPath p;
  p.backend = Backend::timechange;
  p.origin = rng.provenance();
  const auto run = run_timechange(m, epsilon, t_marks, rng, cfg, false);
  for (std::size_t j = 0; j < t_marks.size(); ++j) {
    p.times.push_back(t_marks[j] / epsilon);
    p.V.push_back(scale_h_inv(m, run.marks[j].w / run.a));
    p.X.push_back(run.marks[j].f[0]);
  }
  return p;
}

std::vector<double> RescaledEnsemble::x_column(std::size_t mark) const {
  std::vector<double> c(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) c[i] = x_at(i, mark);
  return c;
}

std::vector<double> RescaledEnsemble::v_column(std::size_t mark) const {
  std::vector<double> c(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) c[i] = v_at(i, mark);
  return c;
}

RescaledEnsemble rescale_ensemble(const ForceModel& m, const RegimeSpec& regime, double epsilon,
                                  const std::vector<double>& t_marks, std::size_t n_paths,
                                  const SimulationConfig& sim, const EnsembleStreams& streams) {
  if (regime.beta != m.beta()) throw RegimeError("regime does not match the model's beta");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (t_marks.empty() || !std::is_sorted(t_marks.begin(), t_marks.end()) || t_marks.front() < 0.0) {
    throw DomainError("t_marks must be nonempty, nonnegative and sorted");
  }
  if (regime.log_corrected() && !(epsilon < std::exp(-1.0))) {
    throw DomainError("log-corrected rates need epsilon < 1/e");
  }
  RescaledEnsemble e;
  e.epsilon = epsilon;
  e.t_marks = t_marks;
  e.n_paths = n_paths;
  e.regime = regime;
  e.backend = sim.backend;
  const std::size_t nm = t_marks.size();
  e.x.assign(n_paths * nm, 0.0);
  e.v.assign(n_paths * nm, 0.0);
  const double rx = regime.rate_position(epsilon);
  const double rv = regime.rate_velocity(epsilon);

  if (sim.backend == Backend::euler) {
    if (!(sim.dt > 0.0)) throw DomainError("dt must be positive");
    std::vector<long> idx(nm);
    for (std::size_t j = 0; j < nm; ++j) {
      idx[j] = std::lround(t_marks[j] / epsilon / sim.dt);
      e.snap_error = std::max(e.snap_error, std::abs(idx[j] * sim.dt * epsilon - t_marks[j]));
    }
    const long n_steps = idx.back();
    parallel_for(
        n_paths,
        [&](std::size_t i) {
          RngStream rng = streams.stream(i);
          std::size_t next = 0;
          double* xs = &e.x[i * nm];
          double* vs = &e.v[i * nm];
          while (next < nm && idx[next] == 0) ++next;
          euler_stream(m, 0.0, 0.0, sim.dt, n_steps, rng, [&](long k, double v, double x) {
            while (next < nm && idx[next] == k) {
              xs[next] = rx * x;
              vs[next] = rv * v;
              ++next;
            }
          });
        },
        sim.workers);
  } else {
    parallel_for(
        n_paths,
        [&](std::size_t i) {
          RngStream rng = streams.stream(i);
          const auto run = run_timechange(m, epsilon, t_marks, rng, sim.tc, false);
          for (std::size_t j = 0; j < nm; ++j) {
            e.x[i * nm + j] = rx * run.marks[j].f[0];
            e.v[i * nm + j] = rv * scale_h_inv(m, run.marks[j].w / run.a);
          }
        },
        sim.workers);
  }
  return e;
}

double critical5_clock(const ForceModel& m, const KineticPath& path, double epsilon) {
  if (m.beta() != 5.0) throw RegimeError("the critical clock applies to beta = 5 only");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("critical clock needs epsilon in (0, 1)");
  double acc = 0.0;
  for (std::size_t k = 1; k < path.times.size(); ++k) {
    const double g0 = poisson_g_prime(m, path.V[k - 1]);
    const double g1 = poisson_g_prime(m, path.V[k]);
    acc += 0.5 * (g0 * g0 + g1 * g1) * (path.times[k] - path.times[k - 1]);
  }
  return epsilon / std::abs(std::log(epsilon)) * acc;
}

std::vector<double> critical5_ensemble(const ForceModel& m, double epsilon, double t, std::size_t n_paths,
                                       const SimulationConfig& sim, const EnsembleStreams& streams) {
  if (m.beta() != 5.0) throw RegimeError("the critical clock applies to beta = 5 only");
  if (!(epsilon > 0.0 && epsilon < std::exp(-1.0))) throw DomainError("critical clock needs epsilon < 1/e");
  if (!(t > 0.0)) throw DomainError("critical clock needs t > 0");
  std::vector<double> out(n_paths, 0.0);
  const double norm = epsilon / std::abs(std::log(epsilon));
  if (sim.backend == Backend::euler) {
    const long n_steps = std::lround(t / epsilon / sim.dt);
    // g'(v) = 2(1 + v²)/3 for the canonical family.
    const bool canonical = m.family() == FamilyTag::canonical;
    auto gp = [&](double v) { return canonical ? 2.0 * (1.0 + v * v) / 3.0 : poisson_g_prime(m, v); };
    parallel_for(
        n_paths,
        [&](std::size_t i) {
          RngStream rng = streams.stream(i);
          double acc = 0.0;
          double prev = gp(0.0);
          prev *= prev;
          euler_stream(m, 0.0, 0.0, sim.dt, n_steps, rng, [&](long, double v, double) {
            double g = gp(v);
            g *= g;
            acc += 0.5 * (prev + g);
            prev = g;
          });
          out[i] = norm * acc * sim.dt;
        },
        sim.workers);
  } else {
    parallel_for(
        n_paths,
        [&](std::size_t i) {
          RngStream rng = streams.stream(i);
          const auto run = run_timechange(m, epsilon, {t}, rng, sim.tc, true);
          out[i] = run.marks[0].f[1];
        },
        sim.workers);
  }
  return out;
}

}  // namespace kfp
