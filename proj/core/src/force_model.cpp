#include "kfp/force_model.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <vector>

#include "kfp/error.hpp"

namespace kfp {

namespace {

constexpr double kStepS = 0.002;   // node spacing in s = asinh(v)

// Cumulative quantity on the s-grid with value and first two s-derivatives.
struct Cum {
  std::vector<double> val, d1, d2;
  void resize(std::size_t n) {
    val.assign(n, 0.0);
    d1.assign(n, 0.0);
    d2.assign(n, 0.0);
  }
};

inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

struct ScaleTables {
  double beta = 1.0;
  double M = 1e4;
  double ds = kStepS;
  int n = 0;  // number of cells
  std::vector<double> v;
  Cum h, I, G, ell, g;
  bool has_G = false;
  double I_M = 0.0, I_inf = 0.0, c_beta = 1.0;
  double h_M = 0.0, ell_M = 0.0, g_M = 0.0;
  std::optional<double> sigma_beta;

  // Speed-measure lookup on z: 256 uniform cells on [0, 1), then 64 cells per octave.
  struct ZNode {
    double s2, ds2, phi, dphi, psi, dpsi;
  };
  std::vector<double> zn;
  std::vector<ZNode> znode;
  double z_max = 0.0;
  bool has_psi = false;

  static int zcell(double az) {
    if (az < 1.0) return static_cast<int>(az * 256.0);
    const auto bits = std::bit_cast<std::uint64_t>(az);
    const int e = static_cast<int>((bits >> 52) & 0x7FF) - 1023;
    const int j = static_cast<int>((bits >> 46) & 63);
    return 256 + e * 64 + j;
  }

  double hermite5(const Cum& q, int k, double t) const {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double H0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    const double H1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    const double H2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    const double H4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    const double H5 = 0.5 * (t3 - 2.0 * t4 + t5);
    return q.val[k] * H0 + ds * q.d1[k] * H1 + ds * ds * q.d2[k] * H2 + q.val[k + 1] * (1.0 - H0) +
           ds * q.d1[k + 1] * H4 + ds * ds * q.d2[k + 1] * H5;
  }

  double hermite5_dt(const Cum& q, int k, double t) const {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    const double H0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    const double H1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    const double H2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    const double H4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    const double H5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    return q.val[k] * H0 + ds * q.d1[k] * H1 + ds * ds * q.d2[k] * H2 - q.val[k + 1] * H0 +
           ds * q.d1[k + 1] * H4 + ds * ds * q.d2[k + 1] * H5;
  }

  // Value of a tabulated quantity at 0 <= v <= M.
  double eval(const Cum& q, double vv) const {
    const double s = std::asinh(vv);
    int k = static_cast<int>(s / ds);
    k = std::clamp(k, 0, n - 1);
    return hermite5(q, k, s / ds - k);
  }

  // Smallest v in [0, M] with q(v) = target for an increasing q.
  double invert(const Cum& q, double target) const {
    const auto it = std::upper_bound(q.val.begin(), q.val.end(), target);
    int k = static_cast<int>(it - q.val.begin()) - 1;
    k = std::clamp(k, 0, n - 1);
    double lo = 0.0, hi = 1.0, t = 0.5;
    const double span = q.val[k + 1] - q.val[k];
    if (span > 0.0) t = std::clamp((target - q.val[k]) / span, 0.0, 1.0);
    for (int it2 = 0; it2 < 60; ++it2) {
      const double f = hermite5(q, k, t) - target;
      if (f > 0.0) hi = t; else lo = t;
      const double df = hermite5_dt(q, k, t);
      double next = (df > 0.0) ? t - f / df : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) < 1e-15) {
        t = next;
        return std::sinh((k + t) * ds);
      }
      t = next;
    }
    if (hi - lo > 1e-9) throw ConvergenceFailure("table inversion did not converge");
    return std::sinh((k + t) * ds);
  }

  double tail_v(double excess_pow) const { return std::pow(excess_pow, 1.0 / (beta + 1.0)); }

  double h_of(double vv) const {
    const double a = std::abs(vv);
    if (a <= M) return sgn(vv) * eval(h, a);
    return sgn(vv) * (h_M + std::pow(a, beta + 1.0) - std::pow(M, beta + 1.0));
  }

  double h_inv(double z) const {
    const double a = std::abs(z);
    if (a <= h_M) return sgn(z) * invert(h, a);
    return sgn(z) * tail_v(a - h_M + std::pow(M, beta + 1.0));
  }

  double I_of(double a) const {
    if (a <= M) return eval(I, a);
    if (beta == 1.0) return I_M + std::log(a / M);
    return I_M + (std::pow(M, 1.0 - beta) - std::pow(a, 1.0 - beta)) / (beta - 1.0);
  }

  double G_of(double a) const {
    if (a <= M) return eval(G, a);
    return std::pow(a, 2.0 - beta) / (beta - 2.0);
  }

  // Cubic Hermite on cell k; which = 0 (σ⁻²), 1 (φ), 2 (ψ).
  template <int which>
  double zlookup(int k, double az) const {
    const ZNode& a = znode[k];
    const ZNode& b = znode[k + 1];
    const double w = zn[k + 1] - zn[k];
    const double t = (az - zn[k]) / w;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0, h10 = t3 - 2.0 * t2 + t, h11 = t3 - t2;
    if constexpr (which == 0) return a.s2 * h00 + w * a.ds2 * h10 + b.s2 * (1.0 - h00) + w * b.ds2 * h11;
    if constexpr (which == 1) return a.phi * h00 + w * a.dphi * h10 + b.phi * (1.0 - h00) + w * b.dphi * h11;
    return a.psi * h00 + w * a.dpsi * h10 + b.psi * (1.0 - h00) + w * b.dpsi * h11;
  }
};

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::NormalDiffusive: return "NormalDiffusive";
    case Regime::CriticalGaussian: return "CriticalGaussian";
    case Regime::Stable: return "Stable";
    case Regime::CriticalStable: return "CriticalStable";
    case Regime::IntegratedBessel: return "IntegratedBessel";
  }
  return "unknown";
}

ForceModel ForceModel::canonical(double beta, const QuadratureConfig& quad) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive and finite");
  quad.validate();
  ForceModel m;
  m.beta_ = beta;
  m.family_ = FamilyTag::canonical;
  m.quad_ = quad;
  m.build();
  return m;
}

ForceModel ForceModel::custom(double beta, std::function<double(double)> theta,
                              std::function<double(double)> theta_prime, const QuadratureConfig& quad) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive and finite");
  if (!theta || !theta_prime) throw DomainError("custom force needs both theta and theta_prime");
  quad.validate();
  ForceModel m;
  m.beta_ = beta;
  m.family_ = FamilyTag::custom;
  m.quad_ = quad;
  m.theta_raw_ = std::move(theta);
  m.theta_prime_raw_ = std::move(theta_prime);
  for (double v = -50.0; v <= 50.0; v += 0.25) {
    if (!(m.theta(v) > 0.0)) throw DomainError("theta must be positive");
  }
  const double far = quad.tail_cutoff;
  if (std::abs(far * m.theta(far) - 1.0) > 0.01) {
    throw DomainError("theta must satisfy |v| theta(v) -> 1 (off by more than 1% at tail_cutoff)");
  }
  m.build();
  return m;
}

double ForceModel::theta(double v) const {
  if (family_ == FamilyTag::canonical) return 1.0 / std::sqrt(1.0 + v * v);
  return 0.5 * (theta_raw_(v) + theta_raw_(-v));
}

double ForceModel::theta_prime(double v) const {
  if (family_ == FamilyTag::canonical) return -v * std::pow(1.0 + v * v, -1.5);
  return 0.5 * (theta_prime_raw_(v) - theta_prime_raw_(-v));
}

double ForceModel::theta_pow(double v, double p) const {
  if (family_ == FamilyTag::canonical) return std::pow(1.0 + v * v, -0.5 * p);
  return std::pow(theta(v), p);
}

double force(const ForceModel& m, double v) {
  if (m.family() == FamilyTag::canonical) return v / (1.0 + v * v);
  return -m.theta_prime(v) / m.theta(v);
}

void ForceModel::build() {
  auto t = std::make_shared<ScaleTables>();
  const double b = beta_;
  t->beta = b;
  t->M = quad_.tail_cutoff;
  const double smax = std::asinh(t->M);
  t->n = static_cast<int>(std::ceil(smax / kStepS));
  t->ds = smax / t->n;
  const int n = t->n;
  const double ds = t->ds;
  t->v.resize(n + 1);
  for (int k = 0; k <= n; ++k) t->v[k] = std::sinh(k * ds);
  t->v[n] = t->M;
  t->h.resize(n + 1);
  t->I.resize(n + 1);
  t->ell.resize(n + 1);
  t->has_G = b > 2.0;
  if (t->has_G) {
    t->G.resize(n + 1);
    t->g.resize(n + 1);
  }

  auto F = [&](double v) { return force(*this, v); };
  auto to_s = [&](Cum& q, int k, double d1, double d2) {
    const double s = k * ds;
    const double c = std::cosh(s), sh = std::sinh(s);
    q.d1[k] = d1 * c;
    q.d2[k] = d2 * c * c + d1 * sh;
  };
  // ∫ over cell k of f(v) dv, integrated in s.
  auto cell = [&](int k, auto&& f) {
    const double s0 = k * ds;
    return gauss_kronrod_15([&](double s) { return f(std::sinh(s)) * std::cosh(s); }, s0, s0 + ds).value;
  };
  auto cell_t = [&](int k, auto&& f) {
    // Same, but f receives (v, local t) so nested quantities can use Hermite.
    const double s0 = k * ds;
    return gauss_kronrod_15([&](double s) { return f(std::sinh(s), (s - s0) / ds) * std::cosh(s); }, s0, s0 + ds)
        .value;
  };

  for (int k = 0; k <= n; ++k) {
    const double v = t->v[k];
    const double tm = theta_pow(v, -b), tp = theta_pow(v, b), f = F(v);
    to_s(t->h, k, (b + 1.0) * tm, (b + 1.0) * b * f * tm);
    to_s(t->I, k, tp, -b * f * tp);
    if (t->has_G) to_s(t->G, k, -v * tp, -tp + b * v * f * tp);
  }
  for (int k = 0; k < n; ++k) {
    t->h.val[k + 1] = t->h.val[k] + (b + 1.0) * cell(k, [&](double v) { return theta_pow(v, -b); });
    t->I.val[k + 1] = t->I.val[k] + cell(k, [&](double v) { return theta_pow(v, b); });
  }
  if (t->has_G) {
    t->G.val[n] = std::pow(t->M, 2.0 - b) / (b - 2.0);
    for (int k = n - 1; k >= 0; --k) {
      t->G.val[k] = t->G.val[k + 1] + cell(k, [&](double v) { return v * theta_pow(v, b); });
    }
  }
  for (int k = 0; k <= n; ++k) {
    const double v = t->v[k];
    const double tm = theta_pow(v, -b), f = F(v);
    const double lp = 2.0 * tm * t->I.val[k];
    to_s(t->ell, k, lp, b * f * lp + 2.0);
    if (t->has_G) {
      const double gp = 2.0 * tm * t->G.val[k];
      to_s(t->g, k, gp, b * f * gp - 2.0 * v);
    }
  }
  for (int k = 0; k < n; ++k) {
    t->ell.val[k + 1] = t->ell.val[k] + cell_t(k, [&](double v, double tt) {
      return 2.0 * theta_pow(v, -b) * t->hermite5(t->I, k, tt);
    });
    if (t->has_G) {
      t->g.val[k + 1] = t->g.val[k] + cell_t(k, [&](double v, double tt) {
        return 2.0 * theta_pow(v, -b) * t->hermite5(t->G, k, tt);
      });
    }
  }

  const double M = t->M;
  t->I_M = t->I.val[n];
  t->h_M = t->h.val[n];
  t->ell_M = t->ell.val[n];
  if (t->has_G) t->g_M = t->g.val[n];
  if (b > 1.0) {
    t->I_inf = t->I_M + std::pow(M, 1.0 - b) / (b - 1.0);
    t->c_beta = 1.0 / (2.0 * t->I_inf);
  } else {
    t->I_inf = INFINITY;
    t->c_beta = 1.0;
  }

  if (b > 5.0) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += cell_t(k, [&](double v, double tt) {
        const double Gv = t->hermite5(t->G, k, tt);
        return theta_pow(v, -b) * Gv * Gv;
      });
    }
    acc += std::pow(M, 5.0 - b) / ((b - 5.0) * (b - 2.0) * (b - 2.0));
    t->sigma_beta = std::sqrt(8.0 * t->c_beta * acc);
  } else if (b == 5.0) {
    t->sigma_beta = std::sqrt(4.0 * t->c_beta / 27.0);
  } else if (b > 1.0) {
    const double al = (b + 1.0) / 3.0;
    const double pw = std::pow(3.0, 1.0 - 2.0 * al) * std::pow(2.0, al - 1.0) * t->c_beta * std::numbers::pi /
                      (std::pow(std::tgamma(al), 2.0) * std::sin(std::numbers::pi * al / 2.0));
    t->sigma_beta = std::pow(pw, 1.0 / al);
  } else if (b == 1.0) {
    const double pw = std::pow(2.0, 2.0 / 3.0) * std::pow(3.0, -5.0 / 6.0) * std::numbers::pi /
                      std::pow(std::tgamma(2.0 / 3.0), 2.0);
    t->sigma_beta = std::pow(pw, 1.5);
  }

  // Speed-measure lookup.
  {
    const int octaves = std::max(1, static_cast<int>(std::ceil(std::log2(t->h_M))));
    const int nz = 256 + octaves * 64;
    t->zn.resize(nz + 1);
    for (int k = 0; k <= 256; ++k) t->zn[k] = k / 256.0;
    for (int e = 0; e < octaves; ++e) {
      for (int j = 0; j < 64; ++j) t->zn[256 + e * 64 + j] = std::ldexp(1.0 + j / 64.0, e);
    }
    t->zn[nz] = std::ldexp(1.0, octaves);
    t->z_max = t->zn[nz];
    t->has_psi = (b == 5.0);
    t->znode.resize(nz + 1);
    const double b1 = b + 1.0;
    for (int k = 0; k <= nz; ++k) {
      const double z = t->zn[k];
      const double v = t->h_inv(z);
      const double f = F(v);
      const double th3 = theta_pow(v, 3.0 * b) / (b1 * b1 * b1);
      const double s2 = theta_pow(v, 2.0 * b) / (b1 * b1);
      const double ds2 = -2.0 * b * f * th3;
      auto& nd = t->znode[k];
      nd.s2 = s2;
      nd.ds2 = ds2;
      nd.phi = v * s2;
      nd.dphi = th3 * (1.0 - 2.0 * b * v * f);
      nd.psi = nd.dpsi = 0.0;
      if (t->has_psi) {
        const double gp = 2.0 * theta_pow(v, -b) * t->G_of(v);
        const double gpp = b * f * gp - 2.0 * v;
        const double hp = b1 * theta_pow(v, -b);
        nd.psi = gp * gp * s2;
        nd.dpsi = 2.0 * gp * gpp * s2 / hp + gp * gp * ds2;
      }
    }
  }
  tables_ = std::move(t);
}

double c_beta(const ForceModel& m, const QuadratureConfig& quad) {
  quad.validate();
  const double b = m.beta();
  if (b <= 1.0) return 1.0;
  const auto r = integrate_to_infinity([&](double v) { return m.theta_pow(v, b); }, 0.0,
                                       [&](double M) { return std::pow(M, 1.0 - b) / (b - 1.0); }, quad);
  return 1.0 / (2.0 * r.value);
}

double c_beta(const ForceModel& m) { return m.tables().c_beta; }

double c_beta_exp_sinh(const ForceModel& m) {
  const double b = m.beta();
  if (b <= 1.0) return 1.0;
  boost::math::quadrature::exp_sinh<double> q;
  double err = 0.0;
  const double v = q.integrate([&](double x) { return m.theta_pow(x, b); }, 1e-14, &err);
  if (!std::isfinite(v) || err > 1e-10 * v) throw QuadratureFailure("exp-sinh route for c_beta did not converge");
  return 1.0 / (2.0 * v);
}

double mu_density(const ForceModel& m, double v) { return c_beta(m) * m.theta_pow(v, m.beta()); }

double mu_cdf(const ForceModel& m, double v) {
  if (m.beta() <= 1.0) throw RegimeError("mu_beta is not a probability measure for beta <= 1");
  const auto& t = m.tables();
  return 0.5 + sgn(v) * t.c_beta * t.I_of(std::abs(v));
}

double mu_sample(const ForceModel& m, double u) {
  const double b = m.beta();
  if (b <= 1.0) throw RegimeError("mu_beta sampling requires beta > 1");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("mu_sample needs u in (0, 1)");
  const auto& t = m.tables();
  const double y = std::abs(u - 0.5) / t.c_beta;
  const double s = u < 0.5 ? -1.0 : 1.0;
  if (y <= t.I_M) return s * t.invert(t.I, y);
  const double base = std::pow(t.M, 1.0 - b) - (b - 1.0) * (y - t.I_M);
  return s * std::pow(std::max(base, 1e-300), 1.0 / (1.0 - b));
}

double scale_h(const ForceModel& m, double v) { return m.tables().h_of(v); }

double scale_h_prime(const ForceModel& m, double v) { return (m.beta() + 1.0) * m.theta_pow(v, -m.beta()); }

double scale_h_inv(const ForceModel& m, double z) {
  if (!std::isfinite(z)) throw DomainError("scale_h_inv needs a finite argument");
  return m.tables().h_inv(z);
}

double sigma_of_z(const ForceModel& m, double z) { return scale_h_prime(m, scale_h_inv(m, z)); }

double speed_density(const ForceModel& m, double z) {
  const double b = m.beta();
  return m.theta_pow(scale_h_inv(m, z), 2.0 * b) / ((b + 1.0) * (b + 1.0));
}

double phi_of_z(const ForceModel& m, double z) {
  const double b = m.beta();
  const double v = scale_h_inv(m, z);
  return v * m.theta_pow(v, 2.0 * b) / ((b + 1.0) * (b + 1.0));
}

double psi_of_z(const ForceModel& m, double z) {
  if (m.beta() != 5.0) throw RegimeError("psi is defined only for beta = 5");
  const double v = scale_h_inv(m, z);
  const double gp = poisson_g_prime(m, v);
  return gp * gp * m.theta_pow(v, 10.0) / 36.0;
}

double poisson_g_prime(const ForceModel& m, double v) {
  const double b = m.beta();
  if (b <= 2.0) throw RegimeError("g requires beta > 2");
  return 2.0 * m.theta_pow(v, -b) * m.tables().G_of(std::abs(v));
}

double poisson_g(const ForceModel& m, double v) {
  const double b = m.beta();
  if (b <= 2.0) throw RegimeError("g requires beta > 2");
  const auto& t = m.tables();
  const double a = std::abs(v);
  if (a <= t.M) return sgn(v) * t.eval(t.g, a);
  return sgn(v) * (t.g_M + 2.0 * (a * a * a - t.M * t.M * t.M) / (3.0 * (b - 2.0)));
}

double poisson_ell_prime(const ForceModel& m, double v) {
  return sgn(v) * 2.0 * m.theta_pow(v, -m.beta()) * m.tables().I_of(std::abs(v));
}

double poisson_ell(const ForceModel& m, double v) {
  const double b = m.beta();
  const auto& t = m.tables();
  const double a = std::abs(v);
  if (a <= t.M) return t.eval(t.ell, a);
  const double M = t.M;
  if (b == 1.0) return t.ell_M + t.I_M * (a * a - M * M) + a * a * std::log(a / M) - 0.5 * (a * a - M * M);
  const double C = t.I_M + std::pow(M, 1.0 - b) / (b - 1.0);
  return t.ell_M + 2.0 * C * (std::pow(a, b + 1.0) - std::pow(M, b + 1.0)) / (b + 1.0) - (a * a - M * M) / (b - 1.0);
}

double sigma_beta_constant(const ForceModel& m, const QuadratureConfig& quad) {
  const double b = m.beta();
  if (b < 1.0) throw RegimeError("sigma_beta is defined for beta >= 1");
  if (b <= 5.0) return *m.tables().sigma_beta;
  quad.validate();
  const auto& t = m.tables();
  const auto r = integrate_to_infinity(
      [&](double v) {
        const double G = t.G_of(v);
        return m.theta_pow(v, -b) * G * G;
      },
      0.0, [&](double M) { return std::pow(M, 5.0 - b) / ((b - 5.0) * (b - 2.0) * (b - 2.0)); }, quad);
  return std::sqrt(8.0 * c_beta(m, quad) * r.value);
}

double sigma_beta_constant(const ForceModel& m) {
  if (m.beta() < 1.0) throw RegimeError("sigma_beta is defined for beta >= 1");
  return *m.tables().sigma_beta;
}

double kappa_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("kappa_alpha needs alpha in (0, 2)");
  const double g = std::tgamma(alpha);
  return std::pow(2.0, alpha) * std::numbers::pi * std::pow(alpha, 2.0 * alpha) /
         (2.0 * alpha * g * g * std::sin(std::numbers::pi * alpha / 2.0));
}

double RegimeSpec::rate_position(double eps) const {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  switch (regime) {
    case Regime::NormalDiffusive: return std::sqrt(eps);
    case Regime::CriticalGaussian: return std::sqrt(eps / std::abs(std::log(eps)));
    case Regime::Stable: return std::pow(eps, 1.0 / *alpha);
    case Regime::CriticalStable: return std::pow(std::abs(eps * std::log(eps)), 1.5);
    case Regime::IntegratedBessel: return std::pow(eps, 1.5);
  }
  return 1.0;
}

double RegimeSpec::rate_velocity(double eps) const {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  return regime == Regime::IntegratedBessel ? std::sqrt(eps) : 1.0;
}

double RegimeSpec::a_eps(double eps) const {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  if (beta > 1.0) return eps / gamma;
  if (beta == 1.0) return eps * std::abs(std::log(eps)) / 2.0;
  return std::pow(eps, (beta + 1.0) / 2.0);
}

RegimeSpec regime_classify(const ForceModel& m) {
  const double b = m.beta();
  RegimeSpec r;
  r.beta = b;
  r.c_beta = c_beta(m);
  r.gamma = (b + 1.0) * r.c_beta;
  if (b > 5.0) {
    r.regime = Regime::NormalDiffusive;
  } else if (b == 5.0) {
    r.regime = Regime::CriticalGaussian;
  } else if (b > 1.0) {
    r.regime = Regime::Stable;
    r.alpha = (b + 1.0) / 3.0;
  } else if (b == 1.0) {
    r.regime = Regime::CriticalStable;
    r.alpha = 2.0 / 3.0;
  } else {
    r.regime = Regime::IntegratedBessel;
    r.delta = 1.0 - b;
  }
  if (b >= 1.0) r.sigma_beta = sigma_beta_constant(m);
  if (r.alpha) r.kappa_alpha = kappa_alpha(*r.alpha);
  return r;
}

RegimeSpec regime_classify(double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  return regime_classify(ForceModel::canonical(beta));
}

FastScale fast_scale(const ForceModel& m) { return FastScale{&m.tables()}; }

double FastScale::speed_density(double z) const {
  const double az = std::abs(z);
  if (az < t->z_max) return t->zlookup<0>(ScaleTables::zcell(az), az);
  const double v = t->h_inv(az);
  const double b1 = t->beta + 1.0;
  return std::pow(v, -2.0 * t->beta) / (b1 * b1);
}

double FastScale::phi(double z) const {
  const double az = std::abs(z);
  if (az < t->z_max) return sgn(z) * t->zlookup<1>(ScaleTables::zcell(az), az);
  const double v = t->h_inv(az);
  const double b1 = t->beta + 1.0;
  return sgn(z) * std::pow(v, 1.0 - 2.0 * t->beta) / (b1 * b1);
}

void FastScale::speed_and_phi(double z, double& s2, double& ph) const {
  const double az = std::abs(z);
  if (az < t->z_max) {
    const int k = ScaleTables::zcell(az);
    s2 = t->zlookup<0>(k, az);
    ph = sgn(z) * t->zlookup<1>(k, az);
    return;
  }
  s2 = speed_density(z);
  ph = phi(z);
}

double FastScale::psi(double z) const {
  if (!t->has_psi) throw RegimeError("psi is defined only for beta = 5");
  const double az = std::abs(z);
  if (az < t->z_max) return t->zlookup<2>(ScaleTables::zcell(az), az);
  const double v = t->h_inv(az);
  const double gp = 2.0 * v * v / 3.0;
  return gp * gp * std::pow(v, -10.0) / 36.0;
}

}  // namespace kfp
