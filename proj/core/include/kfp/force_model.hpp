#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "kfp/quadrature.hpp"

namespace kfp {

enum class FamilyTag { canonical, custom };

enum class Regime { NormalDiffusive, CriticalGaussian, Stable, CriticalStable, IntegratedBessel };

std::string_view regime_name(Regime r);

struct ScaleTables;

/// The force family: β together with an even, positive Θ satisfying |v|Θ(v) → 1.
///
/// Construction precomputes every derived table (h, the Poisson functions,
/// μ_β's CDF, c_β, σ_β and the speed-measure lookup in z) once; afterwards the
/// object is immutable and cheap to copy, so any number of workers may share it.
class ForceModel {
 public:
  /// Θ(v) = (1 + v²)^{-1/2}, so F(v) = v / (1 + v²).
  static ForceModel canonical(double beta, const QuadratureConfig& quad = {});
  /// User-supplied Θ and Θ'. Evenness is enforced by symmetrizing both.
  static ForceModel custom(double beta, std::function<double(double)> theta,
                           std::function<double(double)> theta_prime, const QuadratureConfig& quad = {});

  double beta() const noexcept { return beta_; }
  FamilyTag family() const noexcept { return family_; }
  const QuadratureConfig& quadrature() const noexcept { return quad_; }

  double theta(double v) const;
  double theta_prime(double v) const;
  /// Θ(v)^p, evaluated without forming Θ first for the canonical family.
  double theta_pow(double v, double p) const;

  const ScaleTables& tables() const noexcept { return *tables_; }

 private:
  ForceModel() = default;
  void build();

  double beta_ = 1.0;
  FamilyTag family_ = FamilyTag::canonical;
  QuadratureConfig quad_{};
  std::function<double(double)> theta_raw_;
  std::function<double(double)> theta_prime_raw_;
  std::shared_ptr<const ScaleTables> tables_;
};

/// Rescaling data for one β.
struct RegimeSpec {
  double beta = 0.0;
  Regime regime = Regime::NormalDiffusive;
  std::optional<double> alpha;
  std::optional<double> delta;
  double c_beta = 1.0;
  /// (β+1)c_β.
  double gamma = 1.0;
  /// Limit scale; absent for β < 1, where the limit is the Bessel pair instead.
  std::optional<double> sigma_beta;
  std::optional<double> kappa_alpha;

  /// Factor applied to X_{t/ε}.
  double rate_position(double eps) const;
  /// Factor applied to V_{t/ε}; ε^{1/2} for β < 1 and 1 otherwise.
  double rate_velocity(double eps) const;
  /// Brownian scale a_ε of the time-change representation.
  /// ε/γ for β > 1, ε|log ε|/2 for β = 1, ε^{(β+1)/2} for β < 1.
  double a_eps(double eps) const;
  /// Whether the rate carries a logarithmic correction (β ∈ {1, 5}).
  bool log_corrected() const noexcept {
    return regime == Regime::CriticalGaussian || regime == Regime::CriticalStable;
  }
};

double force(const ForceModel& m, double v);

/// Reciprocal of ∫Θ^β over ℝ, by adaptive quadrature on [0, tail_cutoff] plus
/// the closed-form |v|^{-β} tail; exactly 1 for β ≤ 1.
double c_beta(const ForceModel& m, const QuadratureConfig& quad);
/// Cached value from the construction tables.
double c_beta(const ForceModel& m);
/// Second, independent route: Boost exp-sinh quadrature over [0, ∞).
double c_beta_exp_sinh(const ForceModel& m);

double mu_density(const ForceModel& m, double v);
double mu_cdf(const ForceModel& m, double v);
/// Inverse CDF of μ_β. Throws RegimeError for β ≤ 1.
double mu_sample(const ForceModel& m, double u);

double scale_h(const ForceModel& m, double v);
double scale_h_prime(const ForceModel& m, double v);
double scale_h_inv(const ForceModel& m, double z);

double sigma_of_z(const ForceModel& m, double z);
/// σ(z)^{-2}, the speed density of the time change, exact route via h⁻¹.
double speed_density(const ForceModel& m, double z);
double phi_of_z(const ForceModel& m, double z);
/// Throws RegimeError unless β = 5.
double psi_of_z(const ForceModel& m, double z);

/// Requires β > 2.
double poisson_g(const ForceModel& m, double v);
double poisson_g_prime(const ForceModel& m, double v);
double poisson_ell(const ForceModel& m, double v);
double poisson_ell_prime(const ForceModel& m, double v);

/// σ_β for β ≥ 1 (throws RegimeError for β < 1).
double sigma_beta_constant(const ForceModel& m, const QuadratureConfig& quad);
double sigma_beta_constant(const ForceModel& m);

/// 2^α π α^{2α} / (2α Γ(α)² sin(πα/2)) for α ∈ (0, 2).
double kappa_alpha(double alpha);

RegimeSpec regime_classify(const ForceModel& m);
/// Canonical family.
RegimeSpec regime_classify(double beta);

/// Table-driven evaluation of σ^{-2}, φ and ψ at z, for hot loops.
/// Agrees with the exact routes to about 1e-9 relative.
struct FastScale {
  const ScaleTables* t;
  double speed_density(double z) const;
  double phi(double z) const;
  /// Both of the above with a single cell search.
  void speed_and_phi(double z, double& s2, double& ph) const;
  /// Only valid when β = 5.
  double psi(double z) const;
};
FastScale fast_scale(const ForceModel& m);

}  // namespace kfp
