#include <gtest/gtest.h>

#include <cmath>

#include "kfp/error.hpp"
#include "kfp/force_model.hpp"
#include "kfp/limit_lab.hpp"
#include "kfp/stat_suite.hpp"

using namespace kfp;

TEST(Ecf, TrivialSamples) {
  const auto z = ecf(std::vector<double>(10, 0.0), {0.0, 1.0, 7.0});
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_DOUBLE_EQ(z.real_part[k], 1.0);
    EXPECT_DOUBLE_EQ(z.imag_part[k], 0.0);
  }
  const auto two = ecf({-1.0, 1.0}, {M_PI});
  EXPECT_NEAR(two.real_part[0], -1.0, 1e-15);
  EXPECT_NEAR(two.imag_part[0], 0.0, 1e-15);
  EXPECT_THROW(ecf({}, {1.0}), DomainError);
}

TEST(Ecf, GaussianSamples) {
  RngStream r(1, 0);
  std::vector<double> s(100000);
  for (auto& x : s) x = r.normal();
  const auto g = ecf(s, default_xi_grid(s));
  EXPECT_EQ(g.xi_grid.size(), 21u);
  for (std::size_t k = 0; k < g.xi_grid.size(); ++k) {
    EXPECT_LE(std::hypot(g.real_part[k], g.imag_part[k]), 1.0 + 1e-12);
  }
  EXPECT_NEAR(ecf(s, {1.0}).real_part[0], std::exp(-0.5), 0.01);
  EXPECT_LT(ecf_distance(g, [](double xi) { return std::exp(-0.5 * xi * xi); }), 0.01);
}

TEST(Ecf, DefaultGridSpansTwoDecades) {
  const std::vector<double> s{0.0, 1.0, 2.0, 3.0, 4.0};
  const auto g = default_xi_grid(s);
  EXPECT_NEAR(g.front(), 0.1 / 2.0, 1e-15);
  EXPECT_NEAR(g.back(), 10.0 / 2.0, 1e-12);
}

TEST(StableCdf, ClosedForms) {
  EXPECT_DOUBLE_EQ(stable_cdf({1.3, 1.0}, 0.0), 0.5);
  EXPECT_NEAR(stable_cdf({1.0, 1.0}, 1.0), 0.75, 1e-15);
  EXPECT_NEAR(stable_cdf({2.0, 1.0}, 1.96 * std::sqrt(2.0)), 0.9750021048517795, 1e-12);
}

TEST(StableCdf, ReferenceValues) {
  // 25-digit quadrature of the inversion integral, split at the half periods of sin(xξ).
  struct Ref {
    double a, x, f;
  };
  const Ref refs[] = {{0.5, 0.3, 0.626730961173057751}, {0.5, 5.0, 0.850483092818015576},
                      {0.7, 1.0, 0.739950886579682256}, {1.5, 0.5, 0.639404226481271602},
                      {1.5, 3.0, 0.948402196440814953}, {1.8, 1.0, 0.758714792120899442},
                      {1.2, 20.0, 0.992281041356697089}};
  for (const auto& r : refs) {
    EXPECT_NEAR(stable_cdf({r.a, 1.0}, r.x), r.f, 1e-9) << r.a << " " << r.x;
    EXPECT_NEAR(stable_cdf({r.a, 1.0}, -r.x), 1.0 - r.f, 1e-9);
    EXPECT_NEAR(stable_cdf({r.a, 2.5}, 2.5 * r.x), r.f, 1e-9);
  }
}

TEST(StableCdf, MonotoneWithCorrectLimits) {
  for (double a : {0.4, 0.7, 1.0, 1.5, 1.9}) {
    double prev = 0.0;
    for (double x = -30.0; x <= 30.0; x += 0.37) {
      const double f = stable_cdf({a, 1.0}, x);
      EXPECT_GE(f, prev - 1e-12) << a << " " << x;
      prev = f;
    }
    EXPECT_LT(stable_cdf({a, 1.0}, -1e12), 1e-4);
    EXPECT_GT(stable_cdf({a, 1.0}, 1e12), 1.0 - 1e-4);
  }
}

TEST(StableCdf, InvertsTheDirectSampler) {
  for (double a : {0.7, 1.0, 1.5}) {
    RngStream r(2, static_cast<std::uint64_t>(10 * a));
    const auto s = sample_stable_direct({a, 1.0}, 1.0, 10000, r);
    EXPECT_TRUE(ks_one_sample(s, [a](double x) { return stable_cdf({a, 1.0}, x); }, 0.05).passed()) << a;
  }
}

TEST(StableCdf, EcfInversionConsistency) {
  // Gil-Pelaez applied to the ECF, truncated at Ξ, against stable_cdf.
  const double a = 1.5;
  RngStream r(3, 0);
  const auto s = sample_stable_direct({a, 1.0}, 1.0, 50000, r);
  const double xi_max = 40.0;
  const int nxi = 4000;
  std::vector<double> xi(nxi);
  for (int k = 0; k < nxi; ++k) xi[k] = (k + 0.5) * xi_max / nxi;
  const auto g = ecf(s, xi);
  double sup = 0.0;
  for (double x = -6.0; x <= 6.0; x += 0.5) {
    double acc = 0.0;
    for (int k = 0; k < nxi; ++k) {
      acc += (g.real_part[k] * std::sin(x * xi[k]) - g.imag_part[k] * std::cos(x * xi[k])) / xi[k];
    }
    const double f = 0.5 + acc * (xi_max / nxi) / M_PI;
    sup = std::max(sup, std::abs(f - stable_cdf({a, 1.0}, x)));
  }
  EXPECT_LT(sup, 0.02);
}

TEST(Ks, IdenticalSample) {
  std::vector<double> s;
  for (int i = 0; i < 100; ++i) s.push_back(i);
  const auto r = ks_one_sample(s, [](double x) { return std::clamp((x + 1.0) / 100.0, 0.0, 1.0); });
  EXPECT_LE(r.statistic, 1.0 / 100.0 + 1e-12);
  EXPECT_EQ(ks_two_sample(s, s).statistic, 0.0);
  EXPECT_THROW(ks_one_sample({1, 2, 3}, [](double) { return 0.5; }), DomainError);
}

TEST(Ks, CriticalValues) {
  EXPECT_NEAR(kolmogorov_critical(0.05), 1.3581, 1e-4);
  EXPECT_NEAR(kolmogorov_critical(0.01), 1.6276, 1e-4);
}

TEST(Ks, TwoSampleCalibration) {
  int passes = 0;
  for (int rep = 0; rep < 100; ++rep) {
    RngStream r(4, rep);
    const auto a = sample_stable_direct({1.2, 1.0}, 1.0, 500, r);
    const auto b = sample_stable_direct({1.2, 1.0}, 1.0, 500, r);
    passes += ks_two_sample(a, b, 0.05).passed();
  }
  EXPECT_GE(passes, 90);
}

TEST(Ks, PowerAgainstWrongLaw) {
  RngStream r(5, 0);
  std::vector<double> s(1000);
  for (auto& x : s) x = r.normal();
  EXPECT_FALSE(ks_one_sample(s, [](double x) { return 0.5 + std::atan(x) / M_PI; }, 0.01).passed());
}

TEST(Ks, VerdictMatchesStatistic) {
  RngStream r(6, 0);
  std::vector<double> s(300);
  for (auto& x : s) x = r.normal();
  const auto k = ks_one_sample(s, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }, 0.01);
  EXPECT_EQ(k.passed(), k.statistic <= k.critical_value_1pct);
  EXPECT_EQ(k.passes_at(0.05), k.statistic <= k.critical_value_5pct);
}

TEST(Hill, ParetoIndex) {
  RngStream r(7, 0);
  std::vector<double> s(100000);
  for (auto& x : s) x = std::pow(r.uniform(), -1.0 / 1.5);
  EXPECT_NEAR(hill_tail_index(s, 0.01), 1.5, 0.1);
}

TEST(Hill, ScaleInvariant) {
  RngStream r(8, 0);
  auto s = sample_stable_direct({1.0, 1.0}, 1.0, 20000, r);
  const double h = hill_tail_index(s, 0.02);
  for (auto& x : s) x *= 7.0;
  EXPECT_NEAR(hill_tail_index(s, 0.02), h, 1e-12);
}

TEST(Hill, DegenerateTail) {
  std::vector<double> s(1000, 3.0);
  EXPECT_THROW(hill_tail_index(s, 0.05), DegenerateTail);
  EXPECT_THROW(hill_tail_index(s, 0.001), DomainError);
}

TEST(LogLogFit, RecoversPowerLaw) {
  const auto f = loglog_fit({1.0, 10.0, 100.0, 1000.0}, {2.0, 2.0 * std::sqrt(10.0), 20.0, 2.0 * std::sqrt(1000.0)});
  EXPECT_NEAR(f.slope, 0.5, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(ScalingFit, ValidatesLadder) {
  const auto m = ForceModel::canonical(7.0);
  EXPECT_THROW(scaling_exponent_fit(m, {1e-1, 1e-2, 1e-3}, 1.0, 20, {}, {1, 1}), DomainError);
  EXPECT_THROW(scaling_exponent_fit(m, {1e-1, 5e-2, 3e-2, 2e-2}, 1.0, 20, {}, {1, 1}), DomainError);
}

TEST(Independence, CalibrationOnIndependentPairs) {
  int passes = 0;
  for (int rep = 0; rep < 40; ++rep) {
    RngStream r(9, rep);
    std::vector<double> x(2000), v(2000);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = r.normal();
      v[i] = r.exponential();
    }
    passes += independence_test(x, v, 5, nullptr, 0.05).chi_square.passed();
  }
  EXPECT_GE(passes, 36);
}

TEST(Independence, DetectsDependence) {
  RngStream r(10, 0);
  std::vector<double> x(2000);
  for (auto& e : x) e = r.normal();
  EXPECT_FALSE(independence_test(x, x, 5, nullptr, 0.01).chi_square.passed());
}

TEST(Independence, CoarsensThenFails) {
  RngStream r(11, 0);
  std::vector<double> x(1000), v(1000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = r.normal();
    v[i] = r.normal();
  }
  const auto rep = independence_test(x, v, 16, nullptr, 0.01);  // 1000/256 < 5, so 8 bins
  EXPECT_EQ(rep.bins_used, 8);
  EXPECT_THROW(independence_test(x, v, 40, nullptr, 0.01), SparseBins);
}

TEST(Independence, ReportsVelocityMarginal) {
  const auto m = ForceModel::canonical(6.0);
  RngStream r(12, 0);
  std::vector<double> x(2000), v(2000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = r.normal();
    v[i] = mu_sample(m, r.uniform());
  }
  const auto rep = independence_test(x, v, 5, &m, 0.01);
  ASSERT_TRUE(rep.v_marginal.has_value());
  EXPECT_TRUE(rep.v_marginal->passed());
  EXPECT_EQ(rep.chi_square.dof, 16);
}

TEST(GammaCdf, Values) {
  EXPECT_NEAR(gamma_cdf(1.0, 2.0, 2.0), 1.0 - std::exp(-1.0), 1e-14);
  EXPECT_EQ(gamma_cdf(0.25, 2.0, 0.0), 0.0);
  EXPECT_THROW(gamma_cdf(0.0, 1.0, 1.0), DomainError);
}
