#include "kfp/path_engine.hpp"

#include <cmath>
#include <string>

namespace kfp {

void PathGrid::validate() const {
  if (times.size() != values.size()) throw DomainError("path times and values differ in length");
  if (times.empty() || times[0] != 0.0) throw DomainError("path must start at time 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("path times must be strictly increasing");
  }
}

void TimeChangeMap::validate() const {
  if (grid_times.size() != A_values.size() || A_values.empty()) throw DomainError("malformed time change");
  if (A_values[0] != 0.0) throw DomainError("time change must start at 0");
  for (std::size_t i = 1; i < A_values.size(); ++i) {
    if (A_values[i] < A_values[i - 1]) throw DomainError("time change must be nondecreasing");
  }
}

PathGrid brownian_path(double horizon, long n_steps, RngStream& stream) {
  if (n_steps < 1) throw DomainError("brownian_path needs n_steps >= 1");
  if (!(horizon > 0.0)) throw DomainError("brownian_path needs a positive horizon");
  PathGrid p;
  p.origin = stream.provenance();
  p.times.resize(n_steps + 1);
  p.values.resize(n_steps + 1);
  const double dt = horizon / static_cast<double>(n_steps);
  const double sd = std::sqrt(dt);
  p.times[0] = 0.0;
  p.values[0] = 0.0;
  for (long k = 1; k <= n_steps; ++k) {
    p.times[k] = k * dt;
    p.values[k] = p.values[k - 1] + sd * stream.normal();
  }
  p.times[n_steps] = horizon;
  return p;
}

void extend_brownian_path(PathGrid& path, double new_horizon, RngStream& stream) {
  if (path.times.size() < 2) throw DomainError("cannot extend a path without a step");
  const double dt = path.times[1] - path.times[0];
  const double sd = std::sqrt(dt);
  const long base = static_cast<long>(path.times.size()) - 1;
  for (long k = base + 1; path.times.back() < new_horizon; ++k) {
    path.times.push_back(k * dt);
    path.values.push_back(path.values.back() + sd * stream.normal());
  }
}

namespace {

double eval_checked(const std::function<double(double)>& f, double w, const SingularityPolicy& policy) {
  if (policy.clip && std::abs(w) < policy.clip_level) w = std::copysign(policy.clip_level, w == 0.0 ? 1.0 : w);
  const double y = f(w);
  if (!std::isfinite(y)) {
    throw SingularityError("integrand is not finite at w = " + std::to_string(w) +
                           "; enable clipping for integrable singularities");
  }
  return y;
}

}  // namespace

std::vector<double> cumulative_occupation_integral(const PathGrid& path, const std::function<double(double)>& f,
                                                   const SingularityPolicy& policy) {
  path.validate();
  std::vector<double> out(path.times.size(), 0.0);
  double prev = eval_checked(f, path.values[0], policy);
  for (std::size_t i = 1; i < path.times.size(); ++i) {
    const double cur = eval_checked(f, path.values[i], policy);
    out[i] = out[i - 1] + 0.5 * (prev + cur) * (path.times[i] - path.times[i - 1]);
    prev = cur;
  }
  return out;
}

double occupation_integral(const PathGrid& path, const std::function<double(double)>& f,
                           const SingularityPolicy& policy) {
  return cumulative_occupation_integral(path, f, policy).back();
}

double default_bandwidth(double dt) { return std::pow(dt, 0.4); }

LocalTimeEstimate local_time_zero(const PathGrid& path, LocalTimeMethod method, double bandwidth) {
  path.validate();
  if (!(bandwidth > 0.0)) throw DomainError("local time bandwidth must be positive");
  LocalTimeEstimate est;
  est.method = method;
  est.bandwidth = bandwidth;
  est.t_grid = path.times;
  est.L0_values.assign(path.times.size(), 0.0);
  const auto& w = path.values;
  if (method == LocalTimeMethod::band_occupation) {
    for (std::size_t i = 1; i < w.size(); ++i) {
      const double du = path.times[i] - path.times[i - 1];
      est.L0_values[i] = est.L0_values[i - 1] + segment_rules::band_time(w[i - 1], w[i], du, bandwidth) / (2.0 * bandwidth);
    }
  } else {
    // Count downcrossings of [0, h]: an excursion above h followed by a visit to 0 or below.
    // The grid overshoots both levels by ζ(1/2)/√(2π)·√Δt on average, so the effective band is wider.
    constexpr double kOvershoot = 0.5825971579390106;
    const double mean_dt = path.horizon() / static_cast<double>(w.size() - 1);
    const double band = bandwidth + 2.0 * kOvershoot * std::sqrt(mean_dt);
    bool above = w[0] >= bandwidth;
    long count = 0;
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (w[i] >= bandwidth) {
        above = true;
      } else if (above && w[i] <= 0.0) {
        above = false;
        ++count;
      }
      est.L0_values[i] = 2.0 * band * static_cast<double>(count);
    }
  }
  return est;
}

std::vector<double> local_time_field(const PathGrid& path, const std::vector<double>& levels, double bandwidth) {
  path.validate();
  if (!(bandwidth > 0.0)) throw DomainError("local time bandwidth must be positive");
  std::vector<double> out(levels.size(), 0.0);
  const auto& w = path.values;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) {
      acc += segment_rules::band_time(w[i - 1] - levels[j], w[i] - levels[j], path.times[i] - path.times[i - 1],
                                      bandwidth);
    }
    out[j] = acc / (2.0 * bandwidth);
  }
  return out;
}

TimeChangeMap time_change_A(const PathGrid& path, const std::function<double(double)>& integrand,
                            const SingularityPolicy& policy) {
  TimeChangeMap map;
  map.grid_times = path.times;
  map.A_values = cumulative_occupation_integral(
      path,
      [&](double x) {
        const double y = integrand(x);
        if (y < 0.0) throw DomainError("time change integrand must be nonnegative");
        return y;
      },
      policy);
  map.validate();
  return map;
}

double generalized_inverse(const TimeChangeMap& map, double s) {
  const auto& A = map.A_values;
  const auto& t = map.grid_times;
  if (A.empty()) throw DomainError("empty time change");
  if (s > A.back()) {
    throw RangeExceeded("time change reaches " + std::to_string(A.back()) + " < " + std::to_string(s) +
                        "; extend the path");
  }
  const auto it = map.inverse_kind == InverseKind::strict ? std::lower_bound(A.begin(), A.end(), s)
                                                          : std::upper_bound(A.begin(), A.end(), s);
  if (it == A.end()) return t.back();
  const std::size_t j = static_cast<std::size_t>(it - A.begin());
  if (j == 0) return t[0];
  const double a0 = A[j - 1], a1 = A[j];
  if (!(a1 > a0)) return t[j - 1];
  const double theta = std::clamp((s - a0) / (a1 - a0), 0.0, 1.0);
  return t[j - 1] + theta * (t[j] - t[j - 1]);
}

}  // namespace kfp
