#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "kfp/force_model.hpp"
#include "kfp/path_engine.hpp"
#include "kfp/rng.hpp"

namespace kfp {

enum class Backend { euler, timechange };

std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view s);

/// (V, X) sampled on `times`. For the timechange backend `times` are original
/// (unrescaled) times t/ε of the marks.
struct KineticPath {
  std::vector<double> times;
  std::vector<double> V;
  std::vector<double> X;
  Backend backend = Backend::euler;
  RngProvenance origin{};
};

/// Grid controls for the time-change backend.
struct TimeChangeConfig {
  /// Relative step: Δu = kappa·max(W², floor²).
  double kappa = 0.05;
  /// floor = floor_factor·a_ε.
  double floor_factor = 1.0;
  int refine_depth = 14;
  /// If positive, replaces a_ε (with ε = a = 1 this is plain simulation of (V, X)).
  double a_override = 0.0;
};

/// Which random streams an ensemble draws from: path i uses
/// RngStream(master_seed, make_stream_id(purpose, i)).
struct EnsembleStreams {
  std::uint64_t master_seed = 0;
  std::uint32_t purpose = 0;
  RngStream stream(std::size_t i) const { return RngStream(master_seed, make_stream_id(purpose, i)); }
};

struct SimulationConfig {
  Backend backend = Backend::euler;
  double dt = 0.01;
  TimeChangeConfig tc{};
  unsigned workers = 0;
};

/// Euler–Maruyama V_{k+1} = V_k + ΔB − (β/2)F(V_k)Δt with trapezoid X.
KineticPath simulate_euler(const ForceModel& m, double v0, double x0, double horizon, long n_steps, RngStream& rng);

/// Euler without storing the path: calls obs(k, V, X) after every step k = 1..n_steps.
template <class Obs>
void euler_stream(const ForceModel& m, double v0, double x0, double dt, long n_steps, RngStream& rng, Obs&& obs) {
  const double half_beta_dt = 0.5 * m.beta() * dt;
  const double sd = std::sqrt(dt);
  const double half_dt = 0.5 * dt;
  const bool canonical = m.family() == FamilyTag::canonical;
  double v = v0, x = x0;
  for (long k = 1; k <= n_steps; ++k) {
    const double f = canonical ? v / (1.0 + v * v) : force(m, v);
    const double vn = v + sd * rng.normal() - half_beta_dt * f;
    x += half_dt * (v + vn);
    v = vn;
    obs(k, v, x);
  }
}

/// Exact time-change representation at scale ε: returns (V^ε_t, X^ε_t) at the
/// rescaled times `t_marks`. The path's `times` hold t/ε.
KineticPath simulate_timechange(const ForceModel& m, double epsilon, const std::vector<double>& t_marks,
                                RngStream& rng, const TimeChangeConfig& cfg = {});

struct RescaledEnsemble {
  double epsilon = 0.0;
  std::vector<double> t_marks;
  /// Row-major n_paths × t_marks.size().
  std::vector<double> x;
  std::vector<double> v;
  std::size_t n_paths = 0;
  RegimeSpec regime;
  Backend backend = Backend::euler;
  /// Largest |snapped − requested| over marks, in rescaled time (0 for timechange).
  double snap_error = 0.0;

  double x_at(std::size_t path, std::size_t mark) const { return x[path * t_marks.size() + mark]; }
  double v_at(std::size_t path, std::size_t mark) const { return v[path * t_marks.size() + mark]; }
  std::vector<double> x_column(std::size_t mark) const;
  std::vector<double> v_column(std::size_t mark) const;
};

/// Simulates from (0, 0) to max(t_marks)/ε and applies the regime's rates.
/// Throws RegimeError when `regime` does not belong to the model's β.
RescaledEnsemble rescale_ensemble(const ForceModel& m, const RegimeSpec& regime, double epsilon,
                                  const std::vector<double>& t_marks, std::size_t n_paths,
                                  const SimulationConfig& sim, const EnsembleStreams& streams);

/// ε|log ε|^{-1} ∫ g'(V_s)² ds over the whole path (trapezoid on its grid).
double critical5_clock(const ForceModel& m, const KineticPath& path, double epsilon);

/// Per-path normalized clocks at rescaled time t, streamed (never storing paths).
/// Euler integrates g'(V)² directly; timechange integrates ψ along the Brownian path.
std::vector<double> critical5_ensemble(const ForceModel& m, double epsilon, double t, std::size_t n_paths,
                                       const SimulationConfig& sim, const EnsembleStreams& streams);

}  // namespace kfp
