#include "kfp/stat_suite.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "kfp/error.hpp"
#include "kfp/quadrature.hpp"

namespace kfp {

std::string_view test_kind_name(TestKind k) {
  switch (k) {
    case TestKind::ks_one_sample: return "ks_one_sample";
    case TestKind::ks_two_sample: return "ks_two_sample";
    case TestKind::chi_square_independence: return "chi_square_independence";
  }
  return "unknown";
}

bool TestReport::passes_at(double lvl) const {
  if (lvl == 0.05) return statistic <= critical_value_5pct;
  if (lvl == 0.01) return statistic <= critical_value_1pct;
  throw DomainError("only the 5% and 1% levels are tabulated");
}

double quantile(std::vector<double> s, double p) {
  if (s.empty()) throw DomainError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  std::sort(s.begin(), s.end());
  const double h = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double iqr(std::vector<double> s) {
  if (s.size() < 2) throw DomainError("IQR needs at least two samples");
  std::sort(s.begin(), s.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
  };
  return q(0.75) - q(0.25);
}

ECFGrid ecf(const std::vector<double>& samples, const std::vector<double>& xi_grid) {
  if (samples.empty()) throw DomainError("ECF of an empty sample");
  ECFGrid e;
  e.xi_grid = xi_grid;
  e.n_samples = samples.size();
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double xi : xi_grid) {
    double c = 0.0, s = 0.0;
    if (xi == 0.0) {
      c = 1.0;
    } else {
      for (double x : samples) {
        c += std::cos(xi * x);
        s += std::sin(xi * x);
      }
      c *= inv;
      s *= inv;
    }
    e.real_part.push_back(c);
    e.imag_part.push_back(s);
  }
  return e;
}

std::vector<double> default_xi_grid(const std::vector<double>& samples) {
  const double r = iqr(samples);
  if (!(r > 0.0)) throw DomainError("sample IQR is zero; cannot scale the frequency grid");
  std::vector<double> g(21);
  for (int k = 0; k < 21; ++k) g[k] = std::pow(10.0, -1.0 + 2.0 * k / 20.0) / r;
  return g;
}

double ecf_distance(const ECFGrid& e, const std::function<double(double)>& cf) {
  double d = 0.0;
  for (std::size_t k = 0; k < e.xi_grid.size(); ++k) {
    d = std::max(d, std::hypot(e.real_part[k] - cf(e.xi_grid[k]), e.imag_part[k]));
  }
  return d;
}

namespace {

// 1 − F(y) for y > 0 from the tail series; `ok` reports whether it settled.
double stable_tail_series(double alpha, double y, bool& ok) {
  double sum = 0.0;
  double prev = INFINITY;
  ok = false;
  for (int k = 1; k < 400; ++k) {
    const double lg = std::lgamma(alpha * k) - std::lgamma(k + 1.0) - alpha * k * std::log(y);
    const double mag = std::exp(lg);
    const double term = ((k % 2 == 1) ? 1.0 : -1.0) * mag * std::sin(k * std::numbers::pi * alpha / 2.0);
    if (alpha > 1.0 && mag > prev) return sum / std::numbers::pi;  // asymptotic series started diverging
    sum += term;
    if (mag < 1e-17 * std::max(std::abs(sum), 1e-300)) {
      ok = true;
      return sum / std::numbers::pi;
    }
    prev = mag;
  }
  return sum / std::numbers::pi;
}

// (1/π)∫_0^∞ sin(y u) e^{−u^α}/u du, summed over half periods of the sine.
double gil_pelaez_integral(double alpha, double y) {
  const double U = std::pow(40.0, 1.0 / alpha);
  const double half = std::numbers::pi / y;
  QuadratureConfig q;
  q.abs_tol = 1e-14;
  q.rel_tol = 1e-12;
  q.max_subdivisions = 2000;
  auto f = [&](double u) {
    if (u == 0.0) return y;
    return std::sin(y * u) * std::exp(-std::pow(u, alpha)) / u;
  };
  double total = 0.0;
  double a = 0.0;
  while (a < U) {
    const double b = std::min(a + half, U);
    total += integrate(f, a, b, q).value;
    a = b;
  }
  return total / std::numbers::pi;
}

}  // namespace

double stable_cdf(const StableSpec& spec, double x) {
  spec.validate();
  const double a = spec.alpha;
  const double y = x / spec.scale;
  if (y == 0.0) return 0.5;
  if (!std::isfinite(y)) return y > 0.0 ? 1.0 : 0.0;
  const double ay = std::abs(y);
  double upper;  // 1 − F(|y|)
  if (a == 1.0) {
    upper = 0.5 - std::atan(ay) / std::numbers::pi;
  } else if (a == 2.0) {
    upper = 0.5 * std::erfc(ay / 2.0);
  } else {
    bool ok = false;
    double tail = 0.0;
    if ((a < 1.0 && ay >= 1.0) || (a > 1.0 && ay > 50.0)) tail = stable_tail_series(a, ay, ok);
    upper = ok ? tail : 0.5 - gil_pelaez_integral(a, ay);
  }
  upper = std::clamp(upper, 0.0, 0.5);
  return y > 0.0 ? 1.0 - upper : upper;
}

double kolmogorov_critical(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("significance level must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(level / 2.0));
}

namespace {

TestReport make_report(TestKind kind, double stat, double c5, double c1, std::size_t n, double level) {
  TestReport r;
  r.test_kind = kind;
  r.statistic = stat;
  r.critical_value_5pct = c5;
  r.critical_value_1pct = c1;
  r.n = n;
  r.level = level;
  r.verdict = r.passes_at(level) ? Verdict::pass : Verdict::fail;
  return r;
}

}  // namespace

TestReport ks_one_sample(std::vector<double> s, const std::function<double(double)>& cdf, double level) {
  if (s.size() < 20) throw DomainError("KS test needs at least 20 samples");
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double rn = std::sqrt(n);
  return make_report(TestKind::ks_one_sample, d, kolmogorov_critical(0.05) / rn, kolmogorov_critical(0.01) / rn,
                     s.size(), level);
}

TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
  if (a.size() < 20 || b.size() < 20) throw DomainError("KS test needs at least 20 samples per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double f = std::sqrt((na + nb) / (na * nb));
  return make_report(TestKind::ks_two_sample, d, kolmogorov_critical(0.05) * f, kolmogorov_critical(0.01) * f,
                     a.size() + b.size(), level);
}

double hill_tail_index(const std::vector<double>& samples, double k_fraction) {
  const std::size_t n = samples.size();
  const auto k = static_cast<std::size_t>(std::ceil(k_fraction * static_cast<double>(n)));
  if (k < 10 || k >= n) throw DomainError("Hill estimator needs 10 <= k < n");
  std::vector<double> a(n);
  std::transform(samples.begin(), samples.end(), a.begin(), [](double x) { return std::abs(x); });
  std::nth_element(a.begin(), a.begin() + k, a.end(), std::greater<>());
  const double threshold = a[k];
  if (!(threshold > 0.0)) throw DegenerateTail("Hill threshold is zero");
  double h = 0.0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(a[i] / threshold);
  h /= static_cast<double>(k);
  if (!(h > 0.0)) throw DegenerateTail("top order statistics are all equal");
  return 1.0 / h;
}

ScalingFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("log-log fit needs matching inputs of size >= 2");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

ScalingFit scaling_exponent_fit(const ForceModel& m, const std::vector<double>& ladder, double t, std::size_t n_paths,
                                const SimulationConfig& sim, const EnsembleStreams& streams, FitTarget target) {
  if (ladder.size() < 4) throw DomainError("scaling fit needs at least 4 epsilons");
  const auto [lo, hi] = std::minmax_element(ladder.begin(), ladder.end());
  if (!(*lo > 0.0) || *hi / *lo < 100.0 * (1.0 - 1e-9)) throw DomainError("epsilon ladder must span two decades");
  // Undo the regime rate to recover the raw X_{t/ε}.
  RegimeSpec raw = regime_classify(m);
  std::vector<double> inv_eps, iqrs;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const double eps = ladder[k];
    EnsembleStreams s = streams;
    s.purpose = streams.purpose + static_cast<std::uint32_t>(k);
    const auto e = rescale_ensemble(m, raw, eps, {t}, n_paths, sim, s);
    const double rx = raw.rate_position(eps), rv = raw.rate_velocity(eps);
    const auto col = target == FitTarget::position ? e.x_column(0) : e.v_column(0);
    iqrs.push_back(iqr(col) / (target == FitTarget::position ? rx : rv));
    inv_eps.push_back(1.0 / eps);
  }
  auto f = loglog_fit(inv_eps, iqrs);
  f.epsilons = ladder;
  f.iqrs = iqrs;
  return f;
}

IndependenceReport independence_test(const std::vector<double>& x, const std::vector<double>& v, int n_bins,
                                     const ForceModel* model, double level) {
  const std::size_t n = x.size();
  if (v.size() != n) throw DomainError("independence test needs paired samples");
  if (n < 1000) throw DomainError("independence test needs at least 1000 pairs");
  if (n_bins < 2) throw DomainError("independence test needs at least 2 bins");
  auto ranks = [n](const std::vector<double>& s) {
    std::vector<std::size_t> idx(n), r(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
    for (std::size_t k = 0; k < n; ++k) r[idx[k]] = k;
    return r;
  };
  const auto rx = ranks(x), rv = ranks(v);
  int k = n_bins;
  for (int attempt = 0; attempt < 2; ++attempt, k /= 2) {
    if (k < 2) break;
    std::vector<double> table(static_cast<std::size_t>(k * k), 0.0), row(k, 0.0), col(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto bx = static_cast<int>(rx[i] * k / n), bv = static_cast<int>(rv[i] * k / n);
      table[bx * k + bv] += 1.0;
      row[bx] += 1.0;
      col[bv] += 1.0;
    }
    bool sparse = false;
    double chi2 = 0.0;
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const double e = row[a] * col[b] / static_cast<double>(n);
        if (e < 5.0) sparse = true;
        const double d = table[a * k + b] - e;
        chi2 += d * d / e;
      }
    }
    if (sparse) continue;
    const int dof = (k - 1) * (k - 1);
    boost::math::chi_squared dist(dof);
    TestReport r;
    r.test_kind = TestKind::chi_square_independence;
    r.statistic = chi2;
    r.critical_value_5pct = boost::math::quantile(dist, 0.95);
    r.critical_value_1pct = boost::math::quantile(dist, 0.99);
    r.n = n;
    r.level = level;
    r.dof = dof;
    r.verdict = r.passes_at(level) ? Verdict::pass : Verdict::fail;
    IndependenceReport out;
    out.chi_square = r;
    out.bins_used = k;
    if (model) out.v_marginal = ks_one_sample(v, [model](double y) { return mu_cdf(*model, y); }, 0.05);
    return out;
  }
  throw SparseBins("expected cell counts below 5 even after coarsening");
}

double gamma_cdf(double shape, double scale, double x) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("gamma parameters must be positive");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

}  // namespace kfp
