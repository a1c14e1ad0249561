#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "kfp/error.hpp"
#include "kfp/path_engine.hpp"
#include "kfp/quadrature.hpp"

using namespace kfp;

TEST(BrownianPath, QuadraticVariation) {
  RngStream r(1, 0);
  const auto p = brownian_path(4.0, 400000, r);
  p.validate();
  double qv = 0.0;
  for (std::size_t i = 1; i < p.values.size(); ++i) qv += std::pow(p.values[i] - p.values[i - 1], 2);
  EXPECT_NEAR(qv, 4.0, 0.05);
  EXPECT_EQ(p.values.front(), 0.0);
  EXPECT_DOUBLE_EQ(p.horizon(), 4.0);
}

TEST(BrownianPath, ExtensionMatchesLongerPath) {
  RngStream a(3, 1), b(3, 1);
  auto p = brownian_path(1.0, 1000, a);
  extend_brownian_path(p, 2.0, a);
  const auto q = brownian_path(2.0, 2000, b);
  ASSERT_EQ(p.values.size(), q.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) EXPECT_DOUBLE_EQ(p.values[i], q.values[i]);
}

TEST(PathGrid, ValidateRejectsBadGrids) {
  PathGrid g{{0.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, {}};
  EXPECT_THROW(g.validate(), DomainError);
  PathGrid h{{0.1, 1.0}, {0.0, 0.0}, {}};
  EXPECT_THROW(h.validate(), DomainError);
}

TEST(Occupation, ConstantIntegrandGivesTime) {
  RngStream r(2, 0);
  const auto p = brownian_path(3.0, 3000, r);
  EXPECT_NEAR(occupation_integral(p, [](double) { return 1.0; }), 3.0, 1e-12);
}

TEST(Occupation, SingularIntegrandPolicy) {
  PathGrid p{{0.0, 1.0}, {0.0, 1.0}, {}};
  auto f = [](double w) { return 1.0 / std::abs(w); };
  EXPECT_THROW(occupation_integral(p, f), SingularityError);
  SingularityPolicy clip{true, 1e-12};
  EXPECT_TRUE(std::isfinite(occupation_integral(p, f, clip)));
}

TEST(Occupation, OccupationFormula) {
  // ∫_0^T f(W) ds = ∫ f(a) L^a_T da
  RngStream r(4, 0);
  const auto p = brownian_path(1.0, 1000000, r);
  auto f = [](double w) { return std::exp(-w * w); };
  const double direct = occupation_integral(p, f);
  std::vector<double> levels;
  for (double a = -5.0; a <= 5.0; a += 0.01) levels.push_back(a);
  const auto L = local_time_field(p, levels, 0.01);
  double via = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) via += 0.01 * f(levels[i]) * L[i];
  EXPECT_NEAR(via / direct, 1.0, 0.03);
}

TEST(LocalTime, MeanAtZero) {
  // E L^0_1 = sqrt(2/π).
  double s = 0.0;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    RngStream r(5, i);
    const auto p = brownian_path(1.0, 20000, r);
    s += local_time_zero(p, LocalTimeMethod::band_occupation, default_bandwidth(1.0 / 20000)).L0_values.back();
  }
  EXPECT_NEAR(s / n, std::sqrt(2.0 / M_PI), 0.06);
}

TEST(LocalTime, MethodsAgree) {
  // Downcrossing counts are noisy per path, so compare ensemble means over a long horizon
  // where the finite-band bias h/L is small.
  double a = 0.0, b = 0.0;
  const int n = 60;
  for (int i = 0; i < n; ++i) {
    RngStream r(6, i);
    const auto p = brownian_path(16.0, 1000000, r);
    a += local_time_zero(p, LocalTimeMethod::band_occupation, 0.05).L0_values.back() / n;
    b += local_time_zero(p, LocalTimeMethod::downcrossing, 0.05).L0_values.back() / n;
  }
  EXPECT_NEAR(a / b, 1.0, 0.03);
}

TEST(GeneralizedInverse, DefiningInequalitiesOnRandomMaps) {
  RngStream r(7, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    TimeChangeMap m;
    const int n = 2 + static_cast<int>(30 * r.uniform());
    double t = 0.0, a = 0.0;
    for (int i = 0; i < n; ++i) {
      m.grid_times.push_back(t);
      m.A_values.push_back(a);
      t += 0.01 + r.uniform();
      a += r.uniform() < 0.3 ? 0.0 : r.exponential();  // flat stretches
    }
    m.inverse_kind = trial % 2 ? InverseKind::strict : InverseKind::right_continuous_generalized;
    m.validate();
    for (int k = 0; k < 20; ++k) {
      const double s = m.A_values.back() * r.uniform();
      const double u = generalized_inverse(m, s);
      // A is continuous piecewise linear: A(τ_s) = s, and nothing left of τ_s reaches
      // (strict) or exceeds (generalized) s.
      auto A = [&](double x) {
        auto it = std::upper_bound(m.grid_times.begin(), m.grid_times.end(), x);
        if (it == m.grid_times.end()) return m.A_values.back();
        const std::size_t j = it - m.grid_times.begin();
        const double w = (x - m.grid_times[j - 1]) / (m.grid_times[j] - m.grid_times[j - 1]);
        return m.A_values[j - 1] + w * (m.A_values[j] - m.A_values[j - 1]);
      };
      ASSERT_NEAR(A(u), s, 1e-9 * (1.0 + s));
      const double left = u - 1e-7;
      if (left > 0.0) {
        if (m.inverse_kind == InverseKind::strict) ASSERT_LT(A(left), s);
        else ASSERT_LE(A(left), s + 1e-9);
      }
    }
    EXPECT_THROW(generalized_inverse(m, m.A_values.back() * 1.5 + 1.0), RangeExceeded);
  }
}

TEST(GeneralizedInverse, FlatStretchKinds) {
  TimeChangeMap m{{0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 2.0}, InverseKind::strict};
  EXPECT_DOUBLE_EQ(generalized_inverse(m, 1.0), 1.0);
  m.inverse_kind = InverseKind::right_continuous_generalized;
  EXPECT_DOUBLE_EQ(generalized_inverse(m, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(generalized_inverse(m, 1.5), 2.5);
}

TEST(TimeChange, UnitIntegrandIsIdentity) {
  RngStream r(8, 0);
  const auto p = brownian_path(2.0, 2000, r);
  const auto m = time_change_A(p, [](double) { return 1.0; });
  EXPECT_NEAR(generalized_inverse(m, 1.234), 1.234, 1e-12);
}

TEST(SegmentRules, MatchQuadrature) {
  QuadratureConfig q;
  const double du = 0.3;
  for (auto [w0, w1] : {std::pair{0.2, 1.1}, {-0.7, 0.4}, {1.5, -0.2}}) {
    // Along a linear step ∫ f(W) ds = du/(w1 − w0) ∫_{w0}^{w1} f(w) dw; split the w range at the kinks.
    auto along = [&](const std::function<double(double)>& f) {
      std::vector<double> cuts{std::min(w0, w1), std::max(w0, w1)};
      for (double level : {0.0, 0.05, -0.05, 0.3, -0.3}) {
        if (level > cuts[0] && level < cuts[1]) cuts.push_back(level);
      }
      std::sort(cuts.begin(), cuts.end());
      double acc = 0.0;
      for (std::size_t i = 1; i < cuts.size(); ++i) acc += integrate(f, cuts[i - 1], cuts[i], q).value;
      return du * acc / std::abs(w1 - w0);
    };
    const double ev = along([](double w) { return std::pow(std::abs(w), -0.4); });
    EXPECT_NEAR(segment_rules::even_power(w0, w1, du, 0.4), ev, 1e-8);
    const double od = along([](double w) { return std::abs(w) >= 0.05 ? std::copysign(std::pow(std::abs(w), -1.3), w) : 0.0; });
    EXPECT_NEAR(segment_rules::odd_power_cut(w0, w1, du, -1.3, 0.05), od, 1e-7);
    const double bt = along([](double w) { return std::abs(w) < 0.3 ? 1.0 : 0.0; });
    EXPECT_NEAR(segment_rules::band_time(w0, w1, du, 0.3), bt, 1e-8);
  }
}

TEST(Walker, ValidatesMarks) {
  RngStream r(9, 0);
  WalkerConfig wc;
  EXPECT_THROW(walk_time_change(BandClock{0.01}, {1.0, 0.5}, wc, r), DomainError);
  wc.kappa = 0.0;
  EXPECT_THROW(walk_time_change(BandClock{0.01}, {1.0}, wc, r), DomainError);
}

TEST(Walker, ZeroMarkRecordsOrigin) {
  RngStream r(10, 0);
  const auto out = walk_time_change(BandClock{0.01}, {0.0, 0.2}, WalkerConfig{}, r);
  EXPECT_EQ(out[0].tau, 0.0);
  EXPECT_EQ(out[0].w, 0.0);
  EXPECT_GT(out[1].tau, 0.0);
}

TEST(Walker, InverseLocalTimeLaw) {
  // τ_ℓ (inverse local time at 0) is Lévy with P(τ_ℓ ≤ s) = erfc(ℓ/√(2s)).
  const int n = 2000;
  std::vector<double> tau;
  for (int i = 0; i < n; ++i) {
    RngStream r(11, i);
    tau.push_back(walk_time_change(BandClock{1e-3}, {1.0}, WalkerConfig{}, r)[0].tau);
  }
  std::sort(tau.begin(), tau.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = std::erfc(1.0 / std::sqrt(2.0 * tau[i]));
    d = std::max({d, (i + 1.0) / n - f, f - double(i) / n});
  }
  EXPECT_LT(d, 1.6276 / std::sqrt(n));
}

TEST(Walker, RecorderTracesContinuousPath) {
  RngStream r(12, 0);
  PathGrid g;
  walk_time_change(BandClock{1e-3}, {0.5}, WalkerConfig{}, r, PathRecorder{&g});
  g.validate();
  for (std::size_t i = 1; i < g.times.size(); ++i) EXPECT_GE(g.times[i], g.times[i - 1]);
}
