#pragma once

#include <functional>

namespace kfp {

struct QuadratureConfig {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  /// Beyond this |v| the tail Θ(v) ≈ 1/|v| is integrated in closed form.
  double tail_cutoff = 1e4;
  int max_subdivisions = 4000;

  /// Throws DomainError unless tolerances are positive and tail_cutoff >= 100.
  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

using Integrand = std::function<double(double)>;

/// Single 15-point Kronrod panel on [a, b]; error is |K15 - G7|.
QuadratureResult gauss_kronrod_15(const Integrand& f, double a, double b);

/// Globally adaptive Gauss-Kronrod 7/15 on a finite interval.
/// Throws QuadratureFailure when max_subdivisions is reached first.
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg);

/// ∫_a^∞ f, numerically on [a, tail_cutoff] plus the caller's closed-form tail
/// tail(M) = ∫_M^∞ f.
QuadratureResult integrate_to_infinity(const Integrand& f, double a, const std::function<double(double)>& tail,
                                       const QuadratureConfig& cfg);

}  // namespace kfp
