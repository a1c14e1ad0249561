#include <gtest/gtest.h>

#include <cmath>

#include "kfp/error.hpp"
#include "kfp/force_model.hpp"
#include "kfp/sde_sim.hpp"
#include "kfp/stat_suite.hpp"

using namespace kfp;

TEST(Backend, Names) {
  EXPECT_EQ(parse_backend("euler"), Backend::euler);
  EXPECT_EQ(parse_backend("timechange"), Backend::timechange);
  EXPECT_EQ(backend_name(Backend::timechange), "timechange");
  EXPECT_THROW(parse_backend("milstein"), ConfigError);
}

TEST(Euler, ReproducibleAndConsistent) {
  const auto m = ForceModel::canonical(2.0);
  RngStream a(1, 0), b(1, 0);
  const auto p = simulate_euler(m, 0.3, -1.0, 5.0, 500, a);
  const auto q = simulate_euler(m, 0.3, -1.0, 5.0, 500, b);
  EXPECT_EQ(p.V, q.V);
  EXPECT_EQ(p.X, q.X);
  EXPECT_EQ(p.V.front(), 0.3);
  EXPECT_EQ(p.X.front(), -1.0);
  double x = -1.0;
  for (std::size_t k = 1; k < p.V.size(); ++k) x += 0.5 * 0.01 * (p.V[k] + p.V[k - 1]);
  EXPECT_NEAR(p.X.back(), x, 1e-10);
}

TEST(Euler, VelocityRelaxesToInvariantMeasure) {
  const auto m = ForceModel::canonical(4.0);
  std::vector<double> v(2000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    RngStream r(2, i);
    v[i] = simulate_euler(m, 0.0, 0.0, 60.0, 6000, r).V.back();
  }
  const auto ks = ks_one_sample(v, [&](double x) { return mu_cdf(m, x); }, 0.01);
  EXPECT_TRUE(ks.passed()) << ks.statistic;
}

TEST(Ensemble, WorkerCountDoesNotChangeResults) {
  const auto m = ForceModel::canonical(3.0);
  const auto reg = regime_classify(m);
  for (Backend b : {Backend::euler, Backend::timechange}) {
    SimulationConfig s1;
    s1.backend = b;
    s1.workers = 1;
    auto s3 = s1;
    s3.workers = 3;
    const auto e1 = rescale_ensemble(m, reg, 0.05, {0.5, 1.0}, 64, s1, {9, 1});
    const auto e3 = rescale_ensemble(m, reg, 0.05, {0.5, 1.0}, 64, s3, {9, 1});
    EXPECT_EQ(e1.x, e3.x);
    EXPECT_EQ(e1.v, e3.v);
  }
}

TEST(Ensemble, RejectsMismatchedRegime) {
  const auto m = ForceModel::canonical(3.0);
  EXPECT_THROW(rescale_ensemble(m, regime_classify(2.0), 0.1, {1.0}, 4, {}, {1, 1}), RegimeError);
  const auto m1 = ForceModel::canonical(1.0);
  EXPECT_THROW(rescale_ensemble(m1, regime_classify(m1), 0.5, {1.0}, 4, {}, {1, 1}), DomainError);
  EXPECT_THROW(rescale_ensemble(m, regime_classify(m), 0.1, {1.0, 0.5}, 4, {}, {1, 1}), DomainError);
}

TEST(Ensemble, SnapErrorReported) {
  const auto m = ForceModel::canonical(7.0);
  SimulationConfig s;
  s.dt = 0.3;
  const auto e = rescale_ensemble(m, regime_classify(m), 0.1, {1.0}, 4, s, {1, 1});
  EXPECT_NEAR(e.snap_error, std::abs(std::lround(10.0 / 0.3) * 0.3 * 0.1 - 1.0), 1e-12);
}

TEST(Backends, SameLawSmallEnsemble) {
  const auto m = ForceModel::canonical(3.0);
  const auto reg = regime_classify(m);
  SimulationConfig se;
  auto st = se;
  st.backend = Backend::timechange;
  const auto a = rescale_ensemble(m, reg, 0.05, {1.0}, 1500, se, {3, 1});
  const auto b = rescale_ensemble(m, reg, 0.05, {1.0}, 1500, st, {3, 2});
  EXPECT_TRUE(ks_two_sample(a.x_column(0), b.x_column(0), 0.01).passed());
  EXPECT_TRUE(ks_two_sample(a.v_column(0), b.v_column(0), 0.01).passed());
}

TEST(TimeChange, MarksAreOriginalTimes) {
  const auto m = ForceModel::canonical(2.0);
  RngStream r(4, 0);
  const auto p = simulate_timechange(m, 0.01, {0.5, 1.0}, r);
  ASSERT_EQ(p.times.size(), 2u);
  EXPECT_DOUBLE_EQ(p.times[0], 50.0);
  EXPECT_DOUBLE_EQ(p.times[1], 100.0);
  EXPECT_EQ(p.backend, Backend::timechange);
}

TEST(Critical5, RequiresBetaFive) {
  const auto m = ForceModel::canonical(4.0);
  RngStream r(5, 0);
  const auto p = simulate_euler(m, 0.0, 0.0, 1.0, 10, r);
  EXPECT_THROW(critical5_clock(m, p, 1e-3), RegimeError);
  EXPECT_THROW(critical5_ensemble(m, 1e-3, 1.0, 4, {}, {1, 1}), RegimeError);
}

TEST(Critical5, BackendsAgreeOnMeanClock) {
  const auto m = ForceModel::canonical(5.0);
  SimulationConfig se;
  auto st = se;
  st.backend = Backend::timechange;
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
  };
  const double a = mean(critical5_ensemble(m, 1e-2, 1.0, 600, se, {6, 1}));
  const double b = mean(critical5_ensemble(m, 1e-2, 1.0, 600, st, {6, 2}));
  EXPECT_NEAR(a / b, 1.0, 0.15);
}
