#include <gtest/gtest.h>

#include <cmath>

#include "kfp/error.hpp"
#include "kfp/quadrature.hpp"

using namespace kfp;

TEST(Quadrature, KronrodExactForPolynomials) {
  const auto r = gauss_kronrod_15([](double x) { return std::pow(x, 20); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 1.0 / 21.0, 1e-15);
}

TEST(Quadrature, AdaptiveHandlesEndpointSingularity) {
  QuadratureConfig q;
  const auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, q);
  EXPECT_NEAR(r.value, 2.0, 1e-9);
}

TEST(Quadrature, TailClosedForm) {
  QuadratureConfig q;
  q.tail_cutoff = 100.0;
  const auto r = integrate_to_infinity([](double x) { return 1.0 / (1.0 + x * x); }, 0.0,
                                       [](double M) { return std::atan(1.0 / M); }, q);
  EXPECT_NEAR(r.value, M_PI / 2.0, 1e-11);
}

TEST(Quadrature, ConfigValidation) {
  QuadratureConfig q;
  q.abs_tol = 0.0;
  EXPECT_THROW(q.validate(), DomainError);
  QuadratureConfig t;
  t.tail_cutoff = 50.0;
  EXPECT_THROW(t.validate(), DomainError);
}

TEST(Quadrature, FailureWhenBudgetExhausted) {
  QuadratureConfig q;
  q.max_subdivisions = 3;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-15;
  EXPECT_THROW(integrate([](double x) { return std::sin(1.0 / (x + 1e-4)); }, 0.0, 1.0, q), QuadratureFailure);
}
