#include "kfp/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "kfp/error.hpp"

namespace kfp {
namespace {

constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
  if (!(tail_cutoff >= 1e2)) throw DomainError("tail_cutoff must be at least 100");
  if (max_subdivisions < 1) throw DomainError("max_subdivisions must be positive");
}

QuadratureResult gauss_kronrod_15(const Integrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWk[7];
  double g = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXk[j];
    const double s = f(c - x) + f(c + x);
    k += kWk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  return {k * h, std::abs((k - g) * h), 1};
}

QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureConfig& cfg) {
  if (a == b) return {};
  std::priority_queue<Panel> heap;
  const auto first = gauss_kronrod_15(f, a, b);
  heap.push({a, b, first.value, first.error});
  double total = first.value;
  double err = first.error;
  int n = 1;
  while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
    if (n >= cfg.max_subdivisions) {
      throw QuadratureFailure("subdivision limit reached on [" + std::to_string(a) + ", " + std::to_string(b) +
                              "], error estimate " + std::to_string(err));
    }
    const Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    const auto l = gauss_kronrod_15(f, p.a, m);
    const auto r = gauss_kronrod_15(f, m, p.b);
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push({p.a, m, l.value, l.error});
    heap.push({m, p.b, r.value, r.error});
    ++n;
    if (!std::isfinite(total)) throw QuadratureFailure("non-finite integrand value");
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {total, err, n};
}

QuadratureResult integrate_to_infinity(const Integrand& f, double a, const std::function<double(double)>& tail,
                                       const QuadratureConfig& cfg) {
  const double m = std::max(a, cfg.tail_cutoff);
  QuadratureResult r = integrate(f, a, m, cfg);
  r.value += tail(m);
  return r;
}

}  // namespace kfp
