#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "kfp/error.hpp"
#include "kfp/rng.hpp"

namespace kfp {

/// A sampled process on a time grid.
struct PathGrid {
  std::vector<double> times;
  std::vector<double> values;
  RngProvenance origin{};

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  /// Throws DomainError unless times[0] = 0, times strictly increase and sizes match.
  void validate() const;
};

enum class InverseKind {
  /// inf{u : A(u) >= s}
  strict,
  /// inf{u : A(u) > s}, right-continuous in s
  right_continuous_generalized,
};

/// A sampled nondecreasing function A with its generalized inverse.
struct TimeChangeMap {
  std::vector<double> grid_times;
  std::vector<double> A_values;
  InverseKind inverse_kind = InverseKind::right_continuous_generalized;

  /// Throws DomainError unless A starts at 0 and never decreases.
  void validate() const;
};

/// Band occupation: (1/2h)∫1{|W| < h}. Downcrossing: 2h′·#(downcrossings of [0, h]) with h′ = h + 1.165√Δt
/// for the grid overshoot.
enum class LocalTimeMethod { band_occupation, downcrossing };

struct LocalTimeEstimate {
  std::vector<double> t_grid;
  std::vector<double> L0_values;
  LocalTimeMethod method = LocalTimeMethod::band_occupation;
  double bandwidth = 0.0;
};

/// How to treat integrands that blow up at the origin.
struct SingularityPolicy {
  bool clip = false;
  double clip_level = 1e-12;
};

/// Uniform grid Brownian path started at 0.
PathGrid brownian_path(double horizon, long n_steps, RngStream& stream);
/// Continues `path` with the same step until `new_horizon`, drawing from `stream`
/// where the original construction stopped.
void extend_brownian_path(PathGrid& path, double new_horizon, RngStream& stream);

/// Trapezoid ∫_0^T f(W_s) ds.
double occupation_integral(const PathGrid& path, const std::function<double(double)>& f,
                           const SingularityPolicy& policy = {});
std::vector<double> cumulative_occupation_integral(const PathGrid& path, const std::function<double(double)>& f,
                                                   const SingularityPolicy& policy = {});

/// Default band h = Δt^0.4 for a path with step Δt.
double default_bandwidth(double dt);

LocalTimeEstimate local_time_zero(const PathGrid& path, LocalTimeMethod method, double bandwidth);
/// Band estimate of L^x_T at each level in `levels`.
std::vector<double> local_time_field(const PathGrid& path, const std::vector<double>& levels, double bandwidth);

/// Cumulative trapezoid of a nonnegative integrand along the path.
TimeChangeMap time_change_A(const PathGrid& path, const std::function<double(double)>& integrand,
                            const SingularityPolicy& policy = {});

/// Generalized inverse at s, linear on increasing segments. Throws RangeExceeded
/// when s lies beyond the sampled range.
double generalized_inverse(const TimeChangeMap& map, double s);

// ---------------------------------------------------------------------------
// Exact integrals of power laws along the linear interpolant of one step.

namespace segment_rules {

inline bool nearly_flat(double w0, double w1) {
  return std::abs(w1 - w0) <= 1e-12 * (std::abs(w0) + std::abs(w1)) + 1e-300;
}

/// ∫ |w|^{-p} over a step of length du, p < 1.
inline double even_power(double w0, double w1, double du, double p) {
  if (nearly_flat(w0, w1)) return du * std::pow(std::abs(0.5 * (w0 + w1)), -p);
  auto F = [p](double w) { return std::copysign(std::pow(std::abs(w), 1.0 - p), w) / (1.0 - p); };
  return du * (F(w1) - F(w0)) / (w1 - w0);
}

/// ∫ sg(w)|w|^q 1{|w| >= eta} over a step of length du; eta = 0 needs q > -1.
inline double odd_power_cut(double w0, double w1, double du, double q, double eta) {
  auto F = [q, eta](double w) {
    const double a = std::max(std::abs(w), eta);
    if (q == -1.0) return std::log(a / eta);
    return (std::pow(a, q + 1.0) - std::pow(eta, q + 1.0)) / (q + 1.0);
  };
  if (nearly_flat(w0, w1)) {
    const double m = 0.5 * (w0 + w1);
    return std::abs(m) >= eta ? du * std::copysign(std::pow(std::abs(m), q), m) : 0.0;
  }
  return du * (F(w1) - F(w0)) / (w1 - w0);
}

/// Time spent in (-h, h) during a step of length du.
inline double band_time(double w0, double w1, double du, double h) {
  if (nearly_flat(w0, w1)) return std::abs(0.5 * (w0 + w1)) < h ? du : 0.0;
  const double lo = std::min(w0, w1), hi = std::max(w0, w1);
  const double overlap = std::max(0.0, std::min(hi, h) - std::max(lo, -h));
  return du * overlap / (hi - lo);
}

}  // namespace segment_rules

// ---------------------------------------------------------------------------
// Streaming time-changed walker.
//
// Walks a Brownian path on a level-adapted grid Δu = κ·max(W², floor²),
// accumulating a clock C_u = ∫ c(W) and functionals F_u = ∫ f(W). Whenever the
// clock passes one of the requested marks, the step is refined by Brownian
// bridge bisection (exact in law) before the crossing point is interpolated.
//
// An integrand supplies
//   static constexpr std::size_t N;       number of functionals
//   using Point = ...;                    cached per-point data
//   Point point(double w) const;
//   Segment<N> segment(double w0, const Point& p0, double w1, const Point& p1, double du) const;

template <std::size_t N>
struct Segment {
  double clock = 0.0;
  std::array<double, N> f{};
};

template <std::size_t N>
struct MarkRecord {
  double clock_target = 0.0;
  double tau = 0.0;
  double w = 0.0;
  std::array<double, N> f{};
};

struct WalkerConfig {
  double kappa = 0.05;
  double floor = 1e-3;
  double max_step = std::numeric_limits<double>::infinity();
  int refine_depth = 14;
  long max_steps = 2'000'000'000L;
};

struct NoTrace {
  void operator()(double, double, double, double) const noexcept {}
};

template <class Integrand, class Trace = NoTrace>
std::vector<MarkRecord<Integrand::N>> walk_time_change(const Integrand& in, const std::vector<double>& marks,
                                                       const WalkerConfig& cfg, RngStream& rng,
                                                       Trace&& trace = Trace{}) {
  constexpr std::size_t N = Integrand::N;
  using Point = typename Integrand::Point;
  if (!std::is_sorted(marks.begin(), marks.end())) throw DomainError("clock marks must be sorted");
  if (!(cfg.floor > 0.0) || !(cfg.kappa > 0.0)) throw DomainError("walker needs positive kappa and floor");
  std::vector<MarkRecord<N>> out(marks.size());
  std::size_t next = 0;
  double u = 0.0, w = 0.0, clock = 0.0;
  std::array<double, N> acc{};
  while (next < marks.size() && marks[next] <= 0.0) {
    out[next] = {marks[next], 0.0, 0.0, acc};
    ++next;
  }
  if (next == marks.size()) return out;

  // Accumulate one leaf segment, recording every mark it crosses.
  auto commit = [&](double w0, double w1, double du, const Segment<N>& seg) {
    while (next < marks.size() && clock + seg.clock >= marks[next]) {
      const double theta = seg.clock > 0.0 ? std::clamp((marks[next] - clock) / seg.clock, 0.0, 1.0) : 0.0;
      MarkRecord<N> r;
      r.clock_target = marks[next];
      r.tau = u + theta * du;
      r.w = w0 + theta * (w1 - w0);
      for (std::size_t i = 0; i < N; ++i) r.f[i] = acc[i] + theta * seg.f[i];
      out[next++] = r;
    }
    trace(u, w0, u + du, w1);
    u += du;
    clock += seg.clock;
    for (std::size_t i = 0; i < N; ++i) acc[i] += seg.f[i];
  };

  auto process = [&](auto&& self, double w0, const Point& p0, double w1, const Point& p1, double du,
                     int depth) -> void {
    const Segment<N> seg = in.segment(w0, p0, w1, p1, du);
    if (clock + seg.clock < marks[next] || depth >= cfg.refine_depth) {
      commit(w0, w1, du, seg);
      return;
    }
    const double wm = 0.5 * (w0 + w1) + 0.5 * std::sqrt(du) * rng.normal();
    const Point pm = in.point(wm);
    self(self, w0, p0, wm, pm, 0.5 * du, depth + 1);
    if (next == marks.size()) {
      // Keep the bookkeeping of the untouched half consistent for tracing.
      commit(wm, w1, 0.5 * du, in.segment(wm, pm, w1, p1, 0.5 * du));
      return;
    }
    self(self, wm, pm, w1, p1, 0.5 * du, depth + 1);
  };

  Point p = in.point(w);
  const double sqrt_kappa = std::sqrt(cfg.kappa);
  const double max_sd = std::sqrt(cfg.max_step);
  for (long step = 0; next < marks.size(); ++step) {
    if (step >= cfg.max_steps) throw RangeExceeded("walker step budget exhausted before the last clock mark");
    const double sd = std::min(sqrt_kappa * std::max(std::abs(w), cfg.floor), max_sd);
    const double du = sd * sd;
    const double w1 = w + sd * rng.normal();
    const Point p1 = in.point(w1);
    process(process, w, p, w1, p1, du, 0);
    w = w1;
    p = p1;
  }
  return out;
}

/// Clock = local time at 0 by the band estimator; no functionals. Used for tests.
struct BandClock {
  static constexpr std::size_t N = 1;
  struct Point {};
  double h;
  Point point(double) const { return {}; }
  Segment<1> segment(double w0, const Point&, double w1, const Point&, double du) const {
    Segment<1> s;
    s.clock = segment_rules::band_time(w0, w1, du, h) / (2.0 * h);
    s.f[0] = du;
    return s;
  }
};

/// Generic trapezoid integrand from plain callables, for cross-checks.
template <std::size_t NF>
struct TrapezoidIntegrand {
  static constexpr std::size_t N = NF;
  struct Point {
    double c;
    std::array<double, NF> f;
  };
  std::function<double(double)> clock_fn;
  std::array<std::function<double(double)>, NF> fns;
  Point point(double w) const {
    Point p{clock_fn(w), {}};
    for (std::size_t i = 0; i < NF; ++i) p.f[i] = fns[i](w);
    return p;
  }
  Segment<NF> segment(double, const Point& a, double, const Point& b, double du) const {
    Segment<NF> s;
    s.clock = 0.5 * du * (a.c + b.c);
    for (std::size_t i = 0; i < NF; ++i) s.f[i] = 0.5 * du * (a.f[i] + b.f[i]);
    return s;
  }
};

/// Records every committed segment of a walk as a PathGrid.
struct PathRecorder {
  PathGrid* path;
  void operator()(double u0, double w0, double u1, double w1) const {
    if (path->times.empty()) {
      path->times.push_back(u0);
      path->values.push_back(w0);
    }
    path->times.push_back(u1);
    path->values.push_back(w1);
  }
};

}  // namespace kfp
