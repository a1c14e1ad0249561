#include "kfp/limit_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kfp/error.hpp"
#include "kfp/force_model.hpp"
#include "kfp/parallel.hpp"

namespace kfp {

namespace {

constexpr std::size_t kMaxLadder = 12;

// Band local-time clock with K^η for every rung of the ladder. Each point caches
// |w|^{q+1} (log|w| when q = -1) so a rung costs no extra pow.
struct BianeYorIntegrand {
  static constexpr std::size_t N = kMaxLadder;
  struct Point {
    double a, g;
  };
  double h, q;
  std::array<double, kMaxLadder> eta{};
  std::array<double, kMaxLadder> eta_g{};
  std::size_t rungs = 1;

  double gfun(double a) const { return q == -1.0 ? std::log(a) : std::pow(a, q + 1.0) / (q + 1.0); }
  void set_ladder(const std::vector<double>& e) {
    rungs = e.size();
    for (std::size_t k = 0; k < rungs; ++k) {
      eta[k] = e[k];
      eta_g[k] = e[k] > 0.0 ? gfun(e[k]) : 0.0;
    }
  }
  Point point(double w) const {
    const double a = std::abs(w);
    return {a, a > 0.0 ? gfun(a) : 0.0};
  }
  Segment<N> segment(double w0, const Point& p0, double w1, const Point& p1, double du) const {
    Segment<N> s;
    s.clock = segment_rules::band_time(w0, w1, du, h) / (2.0 * h);
    if (w0 == 0.0) {
      // Start of the path: W ~ w1·sqrt(s/du) keeps the singular power integrable.
      const double base = du * std::copysign(std::pow(p1.a, q), w1) / (1.0 + 0.5 * q);
      for (std::size_t k = 0; k < rungs; ++k) {
        s.f[k] = p1.a > eta[k] ? base * (1.0 - std::pow(eta[k] / p1.a, q + 2.0)) : 0.0;
      }
      return s;
    }
    if (segment_rules::nearly_flat(w0, w1)) {
      for (std::size_t k = 0; k < rungs; ++k) s.f[k] = segment_rules::odd_power_cut(w0, w1, du, q, eta[k]);
      return s;
    }
    const double r = du / (w1 - w0);
    for (std::size_t k = 0; k < rungs; ++k) {
      const double f1 = p1.a >= eta[k] ? p1.g - eta_g[k] : 0.0;
      const double f0 = p0.a >= eta[k] ? p0.g - eta_g[k] : 0.0;
      s.f[k] = r * (f1 - f0);
    }
    return s;
  }
};

// Clock Ā with the integrated signed power giving ∫U.
struct BesselIntegrand {
  static constexpr std::size_t N = 1;
  struct Point {};
  double scale, p, q;

  Point point(double) const { return {}; }
  Segment<1> segment(double w0, const Point&, double w1, const Point&, double du) const {
    Segment<1> s;
    s.clock = scale * segment_rules::even_power(w0, w1, du, p);
    s.f[0] = scale * segment_rules::odd_power_cut(w0, w1, du, q, 0.0);
    return s;
  }
};

BesselIntegrand bessel_integrand(const BesselSpec& spec) {
  const double d = spec.delta;
  return {1.0 / ((2.0 - d) * (2.0 - d)), 2.0 * (1.0 - d) / (2.0 - d), (2.0 * d - 1.0) / (2.0 - d)};
}

double bessel_U(const BesselSpec& spec, double w) {
  return std::copysign(std::pow(std::abs(w), 1.0 / (2.0 - spec.delta)), w);
}

}  // namespace

void StableSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("stable alpha must lie in (0, 2]");
  if (!(scale > 0.0)) throw DomainError("stable scale must be positive");
}

void BesselSpec::validate() const {
  if (!(delta > 0.0 && delta < 2.0)) throw DomainError("Bessel dimension must lie in (0, 2)");
}

std::vector<double> sample_stable_direct(const StableSpec& spec, double t, std::size_t n, RngStream& rng) {
  spec.validate();
  if (!(t >= 0.0)) throw DomainError("stable time must be nonnegative");
  const double a = spec.alpha;
  const double c = spec.scale * std::pow(t, 1.0 / a);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    double s;
    if (a == 1.0) {
      s = std::tan(v);
    } else {
      s = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) * std::pow(std::cos((1.0 - a) * v) / w, (1.0 - a) / a);
    }
    x = c * s;
  }
  return out;
}

std::vector<double> eta_ladder(double eta0, int count) {
  if (!(eta0 > 0.0) || count < 1) throw DomainError("eta ladder needs eta0 > 0 and at least one rung");
  std::vector<double> e(count);
  for (int k = 0; k < count; ++k) e[k] = std::ldexp(eta0, -k);
  return e;
}

BianeYorValue accept_ladder(const std::vector<double>& vals, double alpha, double horizon, double tol) {
  BianeYorValue r;
  r.ladder_values = vals;
  if (vals.empty()) throw DomainError("empty ladder");
  const double floor = std::pow(std::max(horizon, 0.0), 1.0 / (2.0 * alpha));
  auto settled = [&](std::size_t k) {
    return std::abs(vals[k + 1] - vals[k]) < tol * std::max(std::abs(vals[k + 1]), floor);
  };
  r.value = vals.back();
  r.rung = static_cast<int>(vals.size()) - 1;
  while (r.rung > 0 && settled(static_cast<std::size_t>(r.rung) - 1)) --r.rung;
  r.converged = r.rung < static_cast<int>(vals.size()) - 1;
  return r;
}

std::vector<double> biane_yor_K_cumulative(const PathGrid& path, double alpha, double eta) {
  path.validate();
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
  if (alpha >= 1.0 && !(eta > 0.0)) throw DomainError("alpha >= 1 needs a positive cutoff");
  const double q = 1.0 / alpha - 2.0;
  std::vector<double> out(path.times.size(), 0.0);
  for (std::size_t i = 1; i < path.times.size(); ++i) {
    out[i] = out[i - 1] + segment_rules::odd_power_cut(path.values[i - 1], path.values[i],
                                                       path.times[i] - path.times[i - 1], q, eta);
  }
  return out;
}

BianeYorValue biane_yor_K(const PathGrid& path, double alpha, const std::vector<double>& etas) {
  if (alpha < 1.0) {
    BianeYorValue r;
    r.value = biane_yor_K_cumulative(path, alpha, 0.0).back();
    r.converged = true;
    r.ladder_values = {r.value};
    return r;
  }
  if (etas.size() < 2 || !std::is_sorted(etas.rbegin(), etas.rend())) {
    throw DomainError("principal value needs a strictly decreasing ladder of at least two cutoffs");
  }
  std::vector<double> vals;
  for (double e : etas) vals.push_back(biane_yor_K_cumulative(path, alpha, e).back());
  auto r = accept_ladder(vals, alpha, path.horizon());
  if (!r.converged) throw ExtrapolationUnstable("principal-value ladder did not settle");
  return r;
}

std::vector<double> StableSamples::column(std::size_t mark) const {
  std::vector<double> c(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) c[i] = at(i, mark);
  return c;
}

StableSamples stable_from_localtime(double alpha, const std::vector<double>& t_marks, std::size_t n_paths,
                                    const EnsembleStreams& streams, const LocalTimeLabConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
  if (!(cfg.bandwidth > 0.0)) throw DomainError("bandwidth must be positive");
  const bool pv = alpha >= 1.0;
  if (pv && (cfg.ladder_count < 2 || cfg.ladder_count > static_cast<int>(kMaxLadder))) {
    throw DomainError("ladder_count must lie in [2, 12]");
  }
  BianeYorIntegrand in;
  in.h = cfg.bandwidth;
  in.q = 1.0 / alpha - 2.0;
  in.set_ladder({0.0});
  if (pv) {
    in.set_ladder(eta_ladder(cfg.eta0, cfg.ladder_count));
  }
  WalkerConfig wc;
  wc.kappa = cfg.kappa;
  wc.floor = cfg.bandwidth;
  wc.refine_depth = cfg.refine_depth;
  const double norm = cfg.normalize ? std::pow(kappa_alpha(alpha), -1.0 / alpha) : 1.0;

  StableSamples out;
  out.t_marks = t_marks;
  out.n_paths = n_paths;
  const std::size_t nm = t_marks.size();
  out.values.assign(n_paths * nm, 0.0);
  std::vector<std::size_t> bad(n_paths, 0);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        RngStream rng = streams.stream(i);
        const auto marks = walk_time_change(in, t_marks, wc, rng);
        for (std::size_t j = 0; j < nm; ++j) {
          double v = marks[j].f[0];
          if (pv) {
            const std::vector<double> vals(marks[j].f.begin(), marks[j].f.begin() + in.rungs);
            const auto r = accept_ladder(vals, alpha, marks[j].tau, cfg.ladder_tol);
            v = r.value;
            if (!r.converged) ++bad[i];
          }
          out.values[i * nm + j] = norm * v;
        }
      },
      cfg.workers);
  for (auto b : bad) out.unconverged += b;
  return out;
}

BesselPath symmetric_bessel_path(const BesselSpec& spec, double horizon, int n_points, RngStream& rng,
                                 const BesselLabConfig& cfg) {
  spec.validate();
  if (!(horizon > 0.0) || n_points < 1) throw DomainError("Bessel path needs a positive horizon and grid");
  std::vector<double> marks(n_points + 1);
  for (int k = 0; k <= n_points; ++k) marks[k] = horizon * k / n_points;
  WalkerConfig wc;
  wc.kappa = cfg.kappa;
  wc.floor = cfg.floor;
  wc.refine_depth = cfg.refine_depth;
  const auto rec = walk_time_change(bessel_integrand(spec), marks, wc, rng);
  BesselPath p;
  p.U.origin = p.integral.origin = rng.provenance();
  p.U.times = p.integral.times = marks;
  for (const auto& r : rec) {
    p.U.values.push_back(bessel_U(spec, r.w));
    p.integral.values.push_back(r.f[0]);
  }
  return p;
}

std::vector<double> BesselSamples::U_column(std::size_t mark) const {
  std::vector<double> c(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) c[i] = U[i * t_marks.size() + mark];
  return c;
}

std::vector<double> BesselSamples::integral_column(std::size_t mark) const {
  std::vector<double> c(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) c[i] = integral[i * t_marks.size() + mark];
  return c;
}

BesselSamples bessel_ensemble(const BesselSpec& spec, const std::vector<double>& t_marks, std::size_t n_paths,
                              const EnsembleStreams& streams, const BesselLabConfig& cfg) {
  spec.validate();
  WalkerConfig wc;
  wc.kappa = cfg.kappa;
  wc.floor = cfg.floor;
  wc.refine_depth = cfg.refine_depth;
  const auto in = bessel_integrand(spec);
  BesselSamples out;
  out.t_marks = t_marks;
  out.n_paths = n_paths;
  const std::size_t nm = t_marks.size();
  out.U.assign(n_paths * nm, 0.0);
  out.integral.assign(n_paths * nm, 0.0);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        RngStream rng = streams.stream(i);
        const auto rec = walk_time_change(in, t_marks, wc, rng);
        for (std::size_t j = 0; j < nm; ++j) {
          out.U[i * nm + j] = bessel_U(spec, rec[j].w);
          out.integral[i * nm + j] = rec[j].f[0];
        }
      },
      cfg.workers);
  return out;
}

std::vector<double> squared_bessel_euler(double delta, double t, long n_steps, std::size_t n,
                                         const EnsembleStreams& streams) {
  if (!(delta > 0.0) || !(t > 0.0) || n_steps < 1) throw DomainError("bad squared Bessel parameters");
  std::vector<double> out(n);
  const double dt = t / static_cast<double>(n_steps);
  const double sd = std::sqrt(dt);
  parallel_for(n, [&](std::size_t i) {
    RngStream rng = streams.stream(i);
    double z = 0.0;
    for (long k = 0; k < n_steps; ++k) z += delta * dt + 2.0 * std::sqrt(std::max(z, 0.0)) * sd * rng.normal();
    out[i] = z;
  });
  return out;
}

namespace {

// Adapts RngStream to the UniformRandomBitGenerator concept.
struct StreamBits {
  using result_type = std::uint64_t;
  RngStream* rng;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return rng->next_u64(); }
};

}  // namespace

std::vector<double> squared_bessel_transition(double delta, double t, long n_steps, std::size_t n,
                                              const EnsembleStreams& streams) {
  if (!(delta > 0.0) || !(t > 0.0) || n_steps < 1) throw DomainError("bad squared Bessel parameters");
  std::vector<double> out(n);
  const double dt = t / static_cast<double>(n_steps);
  parallel_for(n, [&](std::size_t i) {
    RngStream rng = streams.stream(i);
    StreamBits bits{&rng};
    double z = 0.0;
    for (long k = 0; k < n_steps; ++k) {
      const double lam = z / (2.0 * dt);
      const double j = lam > 0.0 ? static_cast<double>(std::poisson_distribution<long>(lam)(bits)) : 0.0;
      z = std::gamma_distribution<double>(0.5 * delta + j, 2.0 * dt)(bits);
    }
    out[i] = z;
  });
  return out;
}

}  // namespace kfp
