#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "kfp/force_model.hpp"
#include "kfp/limit_lab.hpp"
#include "kfp/sde_sim.hpp"

namespace kfp {

struct ECFGrid {
  std::vector<double> xi_grid;
  std::vector<double> real_part;
  std::vector<double> imag_part;
  std::size_t n_samples = 0;
};

enum class TestKind { ks_one_sample, ks_two_sample, chi_square_independence };
enum class Verdict { pass, fail };

std::string_view test_kind_name(TestKind k);

struct TestReport {
  TestKind test_kind = TestKind::ks_one_sample;
  double statistic = 0.0;
  double critical_value_5pct = 0.0;
  double critical_value_1pct = 0.0;
  std::size_t n = 0;
  /// Level the verdict refers to (0.05 or 0.01).
  double level = 0.05;
  Verdict verdict = Verdict::fail;
  /// Degrees of freedom (chi-square only).
  int dof = 0;

  bool passed() const { return verdict == Verdict::pass; }
  /// Re-judges the statistic at the other level.
  bool passes_at(double lvl) const;
};

double iqr(std::vector<double> samples);
double quantile(std::vector<double> samples, double p);

ECFGrid ecf(const std::vector<double>& samples, const std::vector<double>& xi_grid);
/// 21 points log-spaced on [0.1, 10] divided by the sample IQR.
std::vector<double> default_xi_grid(const std::vector<double>& samples);
/// sup over the grid of |ECF(ξ) − cf(ξ)| for a real (symmetric) target CF.
double ecf_distance(const ECFGrid& e, const std::function<double(double)>& cf);

/// CDF of the symmetric stable law with CF exp(−scale^α|ξ|^α), α ∈ (0, 2].
double stable_cdf(const StableSpec& spec, double x);

/// Asymptotic Kolmogorov critical value for significance `level`.
double kolmogorov_critical(double level);

TestReport ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf, double level = 0.05);
TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.05);

/// Hill estimate of the tail index of |samples| from the top k = ⌈k_fraction·n⌉.
double hill_tail_index(const std::vector<double>& samples, double k_fraction);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> epsilons;
  std::vector<double> iqrs;
};

/// Least squares of log y on log x.
ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class FitTarget { position, velocity };

/// Regresses log IQR of the raw X_{t/ε} (or V_{t/ε}) on log(1/ε).
/// The ladder needs at least 4 values spanning at least two decades.
ScalingFit scaling_exponent_fit(const ForceModel& m, const std::vector<double>& epsilon_ladder, double t,
                                std::size_t n_paths, const SimulationConfig& sim, const EnsembleStreams& streams,
                                FitTarget target = FitTarget::position);

struct IndependenceReport {
  TestReport chi_square;
  int bins_used = 0;
  std::optional<TestReport> v_marginal;
};

/// Chi-square test on an n_bins × n_bins table of joint quantile bins. If an
/// expected count is below 5 the table is coarsened once (n_bins/2); a second
/// failure throws SparseBins. With `model` the V marginal is also KS-tested
/// against μ_β at 5%.
IndependenceReport independence_test(const std::vector<double>& x, const std::vector<double>& v, int n_bins,
                                     const ForceModel* model = nullptr, double level = 0.01);

/// Gamma(shape, scale) CDF.
double gamma_cdf(double shape, double scale, double x);

}  // namespace kfp
