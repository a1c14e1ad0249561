#pragma once

#include <cstddef>
#include <vector>

#include "kfp/path_engine.hpp"
#include "kfp/rng.hpp"
#include "kfp/sde_sim.hpp"

namespace kfp {

/// Symmetric α-stable law with CF exp(−t·scale^α·|ξ|^α).
struct StableSpec {
  double alpha = 1.0;
  double scale = 1.0;
  void validate() const;
};

/// Symmetric Bessel process of dimension δ ∈ (0, 2).
struct BesselSpec {
  double delta = 0.5;
  void validate() const;
};

/// Chambers–Mallows–Stuck samples at time t. α = 2 is allowed (Gaussian, variance 2t·scale²).
std::vector<double> sample_stable_direct(const StableSpec& spec, double t, std::size_t n, RngStream& rng);

/// Geometric cutoffs η_k = η₀·2^{-k}, k = 0..count-1.
std::vector<double> eta_ladder(double eta0, int count);

struct BianeYorValue {
  double value = 0.0;
  bool converged = false;
  /// First rung from which all successive values settle (last rung if none do).
  int rung = 0;
  std::vector<double> ladder_values;
};

/// Ladder acceptance. Successive rungs settle when
/// |K_{k+1} − K_k| < tol·max(|K_{k+1}|, T^{1/(2α)}); the value is the deepest rung
/// and `converged` requires the last two rungs to settle.
BianeYorValue accept_ladder(const std::vector<double>& ladder_values, double alpha, double horizon,
                            double tol = 0.005);

/// K_T = ∫ sg(W)|W|^{1/α−2} ds along a stored path, integrating each power law
/// exactly on the linear interpolant. For α < 1 the cutoff is dropped; for
/// α ≥ 1 the principal value is the deepest rung, which should sit below the
/// grid scale. Throws ExtrapolationUnstable when the last two rungs disagree.
BianeYorValue biane_yor_K(const PathGrid& path, double alpha, const std::vector<double>& etas);
/// Cumulative K^η along the grid for one cutoff (η = 0 only for α < 1).
std::vector<double> biane_yor_K_cumulative(const PathGrid& path, double alpha, double eta);

struct LocalTimeLabConfig {
  /// Band for the local time clock; also the walker floor.
  double bandwidth = 1e-3;
  double kappa = 0.05;
  int refine_depth = 14;
  /// Ladder for α ≥ 1.
  double eta0 = 0.1;
  int ladder_count = 10;
  double ladder_tol = 0.005;
  /// Divide by κ_α^{1/α} so the CF becomes exp(−t|ξ|^α).
  bool normalize = false;
  unsigned workers = 0;
};

struct StableSamples {
  std::vector<double> t_marks;
  /// Row-major n_paths × t_marks.size().
  std::vector<double> values;
  std::size_t n_paths = 0;
  /// Marks where the ladder did not settle (always 0 for α < 1).
  std::size_t unconverged = 0;
  double at(std::size_t path, std::size_t mark) const { return values[path * t_marks.size() + mark]; }
  std::vector<double> column(std::size_t mark) const;
};

/// K_{τ_t} at the requested local-time levels t, one Brownian path per sample.
StableSamples stable_from_localtime(double alpha, const std::vector<double>& t_marks, std::size_t n_paths,
                                    const EnsembleStreams& streams, const LocalTimeLabConfig& cfg = {});

struct BesselLabConfig {
  double kappa = 0.05;
  double floor = 1e-3;
  int refine_depth = 14;
  unsigned workers = 0;
};

struct BesselPath {
  /// U^{(δ)} on the requested U-time grid.
  PathGrid U;
  /// ∫_0^t U ds on the same grid.
  PathGrid integral;
};

/// U_t = sg(W_{τ̄_t})|W_{τ̄_t}|^{1/(2−δ)} on a uniform grid of `n_points` steps on [0, horizon].
BesselPath symmetric_bessel_path(const BesselSpec& spec, double horizon, int n_points, RngStream& rng,
                                 const BesselLabConfig& cfg = {});

struct BesselSamples {
  std::vector<double> t_marks;
  std::vector<double> U;
  std::vector<double> integral;
  std::size_t n_paths = 0;
  std::vector<double> U_column(std::size_t mark) const;
  std::vector<double> integral_column(std::size_t mark) const;
};

BesselSamples bessel_ensemble(const BesselSpec& spec, const std::vector<double>& t_marks, std::size_t n_paths,
                              const EnsembleStreams& streams, const BesselLabConfig& cfg = {});

/// Euler for dZ = δ dt + 2√Z⁺ dB from 0 (full truncation, so E Z_t = δt holds exactly).
/// Converges slowly near 0 when δ < 1; the raw Z_t may be slightly negative.
std::vector<double> squared_bessel_euler(double delta, double t, long n_steps, std::size_t n,
                                         const EnsembleStreams& streams);

/// Squared Bessel from 0 stepped with its exact noncentral chi-square transition.
std::vector<double> squared_bessel_transition(double delta, double t, long n_steps, std::size_t n,
                                              const EnsembleStreams& streams);

}  // namespace kfp
