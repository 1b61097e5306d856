#pragma once

// Exact and approximate diffusion-limit boundary kernels.

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "apbl/collision.hpp"
#include "apbl/kernel_table.hpp"
#include "apbl/scheme_lme.hpp"
#include "apbl/scheme_naive.hpp"

namespace apbl {

/// Quadrature on (0, 1) with plain dv weights.
struct HalfLineQuadrature {
  Vec nodes;
  Vec weights;
};

/// Gauss-Legendre on (0, 1).
inline HalfLineQuadrature unit_gauss(int n) {
  HalfLineQuadrature q;
  detail::gauss_legendre(n, q.nodes, q.weights);
  q.nodes = (q.nodes.array() + 1.0) * 0.5;
  q.weights *= 0.5;
  return q;
}

/// Gauss-Legendre pulled through v = s^q / (s^q + (1-s)^q), which clusters
/// nodes at both ends. Suits factors p that blow up or vanish at 0 or 1.
inline HalfLineQuadrature unit_graded(int n, double q = 4.0) {
  const HalfLineQuadrature s = unit_gauss(n);
  HalfLineQuadrature out;
  out.nodes.resize(n);
  out.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = s.nodes[i];
    const double a = std::pow(x, q);
    const double b = std::pow(1.0 - x, q);
    out.nodes[i] = a / (a + b);
    const double dv = q * (std::pow(x, q - 1.0) * b + a * std::pow(1.0 - x, q - 1.0)) / ((a + b) * (a + b));
    out.weights[i] = s.weights[i] * dv;
  }
  return out;
}

/// Generalized Chandrasekhar function on a quadrature grid for
/// sigma = p(v) p(w); p = 1 gives the classical H.
struct HFunction {
  HalfLineQuadrature quad;
  Vec values;
  Vec p_values;
  std::function<double(double)> p;
  double p_mass = 1.0;  // int_0^1 p on the grid
  double residual = 0.0;
  int iterations = 0;

  /// Nystrom extension: H(v) = 1 / (1 - v/(2 int p) int p(w)^2 H(w) / (v p(w) + w p(v)) dw).
  [[nodiscard]] double operator()(double v) const {
    if (v <= 0.0) return 1.0;
    const double pv = p(v);
    double s = 0.0;
    for (Eigen::Index j = 0; j < values.size(); ++j) {
      const double pw = p_values[j];
      s += quad.weights[j] * pw * pw * values[j] / (v * pw + quad.nodes[j] * pv);
    }
    return 1.0 / (1.0 - v * s / (2.0 * p_mass));
  }
};

/// Newton iteration on the discrete H-equation from H = 1. Plain fixed-point
/// iteration stalls near 1e-9 because the conservative equation is critical.
inline HFunction solve_H_general(const std::function<double(double)>& p, const HalfLineQuadrature& quad,
                                 int max_iterations = 200) {
  const auto n = quad.nodes.size();
  if (n < 1) throw Error("H-function needs at least one node");
  if (quad.nodes.minCoeff() <= 0.0 || quad.nodes.maxCoeff() > 1.0) {
    throw Error("H-function nodes must lie in (0, 1]");
  }
  HFunction h;
  h.quad = quad;
  h.p = p;
  h.p_values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h.p_values[i] = p(quad.nodes[i]);
    if (!(h.p_values[i] > 0.0) || !std::isfinite(h.p_values[i])) {
      throw Error("H-function: p must be positive and finite on the nodes");
    }
  }
  h.p_mass = quad.weights.dot(h.p_values);

  const Vec& v = quad.nodes;
  Mat k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double pw = h.p_values[j];
      k(i, j) = quad.weights[j] * pw * pw / (v[i] * pw + v[j] * h.p_values[i]) / (2.0 * h.p_mass);
    }
  }
  Vec hv = Vec::Ones(n);
  double res = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < max_iterations; ++it) {
    const Vec kh = k * hv;
    const Vec f = hv - Vec::Ones(n) - v.cwiseProduct(hv).cwiseProduct(kh);
    res = f.cwiseAbs().maxCoeff();
    if (res <= 1e-13) break;
    Mat jac = Mat::Identity(n, n);
    jac.diagonal() -= v.cwiseProduct(kh);
    jac -= v.cwiseProduct(hv).asDiagonal() * k;
    hv -= jac.partialPivLu().solve(f);
  }
  if (!(res <= 1e-12)) {
    std::ostringstream os;
    os << "H-function did not converge: residual " << res << " after " << it << " iterations";
    throw Error(os.str());
  }
  h.values = hv;
  h.residual = res;
  h.iterations = it;
  return h;
}

inline HFunction solve_H_constant(const HalfLineQuadrature& quad) {
  return solve_H_general([](double) { return 1.0; }, quad);
}

/// H for a multiplicative cross section on its default 64-node grid: plain
/// Gauss, or the graded grid when p is singular at v = 1. The graded grid
/// keeps the kernel normalization near 1e-6 for the singular case, while for
/// p vanishing at 0 it slows Newton down below the residual target.
inline HFunction solve_H(const CrossSection& sigma) {
  if (!sigma.is_multiplicative()) {
    throw Error("no Chandrasekhar function for non-multiplicative cross section '" + sigma.label() + "'");
  }
  auto p = [sigma](double v) { return sigma.p(v); };
  const bool singular_at_one = !std::isfinite(sigma.p(1.0));
  return solve_H_general(p, singular_at_one ? unit_graded(64) : unit_gauss(64));
}

/// int_0^1 f by tanh-sinh, which tolerates integrable endpoint singularities.
inline double integrate_unit(const std::function<double(double)>& f) {
  boost::math::quadrature::tanh_sinh<double> ts;
  try {
    return ts.integrate(f, 0.0, 1.0);
  } catch (const std::exception& e) {
    // Typically an overflow of v^k/p(v) at abscissas within 1e-300 of an end.
    throw Error(std::string("moment quadrature failed: ") + e.what());
  }
}

/// Builds a, b, c, d from the half-range integrals already stored in k.
inline KernelCoefficients finish_coefficients(KernelCoefficients k) {
  k.kappa = k.gamma / k.alpha;
  const double ka = k.kappa * k.alpha;
  const double den = ka * (1.0 + 4.0 * k.alpha * k.gamma);
  k.a = 1.0 / (2.0 * ka);
  k.b = (k.gamma + 2.0 * k.alpha * k.delta) / den;
  k.c = (2.0 * k.gamma * k.gamma - k.delta) / den;
  k.d = 1.0 - k.gamma / ka;
  return k;
}

/// Coefficients for a general factor p, integrals by tanh-sinh.
inline KernelCoefficients kernel_coefficients(const std::function<double(double)>& p) {
  KernelCoefficients k;
  k.alpha = integrate_unit([&](double v) { return p(v); });
  k.beta = integrate_unit([&](double v) { return v / p(v); });
  k.gamma = integrate_unit([&](double v) { return v * v / p(v); });
  k.delta = integrate_unit([&](double v) { return v * v * v / (p(v) * p(v)); });
  k.v3_over_p = integrate_unit([&](double v) { return v * v * v / p(v); });
  k.v_p = integrate_unit([&](double v) { return v * p(v); });
  return finish_coefficients(k);
}

/// Coefficients for sigma = p(v) p(w). The named families use exact Beta
/// function moments; p = (1 - v^2)^q cannot be sampled up to v = 1 in double
/// precision, so quadrature would lose the endpoint mass.
inline KernelCoefficients kernel_coefficients(const CrossSection& sigma) {
  if (!sigma.is_multiplicative()) {
    throw Error("closed-form kernel needs a multiplicative cross section, got '" + sigma.label() + "'");
  }
  const double q = sigma.exponent();
  KernelCoefficients k;
  switch (sigma.family()) {
    case CrossSection::Family::abs_pow:
      // int_0^1 v^s dv = 1/(s + 1)
      if (!(q > -1.0 && q < 2.0)) throw Error("abs_pow exponent must lie in (-1, 2) for finite moments");
      k.alpha = 1.0 / (q + 1.0);
      k.beta = 1.0 / (2.0 - q);
      k.gamma = 1.0 / (3.0 - q);
      k.delta = 1.0 / (4.0 - 2.0 * q);
      k.v3_over_p = 1.0 / (4.0 - q);
      k.v_p = 1.0 / (q + 2.0);
      return finish_coefficients(k);
    case CrossSection::Family::one_minus_v2_pow:
      // int_0^1 v^m (1 - v^2)^s dv = B((m + 1)/2, s + 1) / 2
      if (!(q > -1.0 && q < 0.5)) throw Error("one_minus_v2_pow exponent must lie in (-1, 1/2) for finite moments");
      k.alpha = 0.5 * std::beta(0.5, q + 1.0);
      k.beta = 0.5 * std::beta(1.0, 1.0 - q);
      k.gamma = 0.5 * std::beta(1.5, 1.0 - q);
      k.delta = 0.5 * std::beta(2.0, 1.0 - 2.0 * q);
      k.v3_over_p = 0.5 * std::beta(2.0, 1.0 - q);
      k.v_p = 0.5 / (q + 1.0);
      return finish_coefficients(k);
    case CrossSection::Family::none:
      break;
  }
  if (sigma.kind() == CrossSection::Kind::constant) {
    const double c = sigma.p(0.5);
    k.alpha = c;
    k.beta = 0.5 / c;
    k.gamma = 1.0 / (3.0 * c);
    k.delta = 0.25 / (c * c);
    k.v3_over_p = 0.25 / c;
    k.v_p = 0.5 * c;
    return finish_coefficients(k);
  }
  return kernel_coefficients([sigma](double v) { return sigma.p(v); });
}

/// a v^2/p + b v + c p + d.
inline double kernel_app(const KernelCoefficients& k, double p, double v) {
  return k.a * v * v / p + k.b * v + k.c * p + k.d;
}

/// Exact kernel K(v) = v H(v) / (2 sqrt(int p int w^2/p)); K0 for sigma = 1.
class ExactKernel {
 public:
  explicit ExactKernel(const CrossSection& sigma) : h_(solve_H(sigma)), coef_(kernel_coefficients(sigma)) {
    scale_ = 0.5 / std::sqrt(coef_.alpha * coef_.gamma);
  }
  [[nodiscard]] double operator()(double v) const { return scale_ * v * h_(v); }
  [[nodiscard]] const HFunction& h() const noexcept { return h_; }
  [[nodiscard]] const KernelCoefficients& coefficients() const noexcept { return coef_; }

 private:
  HFunction h_;
  KernelCoefficients coef_;
  double scale_ = 0.0;
};

/// Samples a kernel on the given nodes in (0, 1) with dv weights. The K_L
/// kinds are defined only on a velocity grid and go through kernel() below.
inline KernelTable kernel_on(KernelKind kind, const CrossSection& sigma, const Vec& nodes, const Vec& dv_weights) {
  KernelTable t;
  t.kind = kind;
  t.nodes = nodes;
  t.dv_weights = dv_weights;
  t.samples.resize(nodes.size());
  auto fill = [&](const std::function<double(double)>& k) {
    for (Eigen::Index i = 0; i < nodes.size(); ++i) t.samples[i] = k(nodes[i]);
  };
  switch (kind) {
    case KernelKind::K0: {
      const ExactKernel k(CrossSection::constant());
      fill([&](double v) { return k(v); });
      break;
    }
    case KernelKind::K1:
      fill([](double v) { return 1.5 * v * v + v; });
      break;
    case KernelKind::K2:
      fill([](double v) { return 3.0 * v * v; });
      break;
    case KernelKind::K3:
      fill([](double v) { return 1.5 * v * v + 15.0 / 14.0 * v - 1.0 / 28.0; });
      break;
    case KernelKind::Ksigma: {
      const ExactKernel k(sigma);
      t.coefficients = k.coefficients();
      fill([&](double v) { return k(v); });
      break;
    }
    case KernelKind::Ksigma_app: {
      const KernelCoefficients c = kernel_coefficients(sigma);
      t.coefficients = c;
      fill([&](double v) { return kernel_app(c, sigma.p(v), v); });
      break;
    }
    case KernelKind::K_L_naive:
    case KernelKind::K_L_lme:
      throw Error(std::string("kernel ") + to_string(kind) + " is only available on a velocity grid");
  }
  return t;
}

/// Kernel sampled on the positive nodes of a velocity grid.
inline KernelTable kernel(KernelKind kind, const CrossSection& sigma, const VelocityGrid& grid) {
  if (kind == KernelKind::K_L_naive) return limit_kernel_naive(assemble_L(sigma, grid));
  if (kind == KernelKind::K_L_lme) return limit_kernel_lme(assemble_L(sigma, grid));
  const auto m = grid.nodes.size();
  Vec nodes(m / 2);
  Vec w(m / 2);
  Eigen::Index j = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (grid.nodes[k] > 0.0) {
      nodes[j] = grid.nodes[k];
      w[j] = 2.0 * grid.mu_weights[k];
      ++j;
    }
  }
  return kernel_on(kind, sigma, nodes.head(j), w.head(j));
}

/// int_0^1 K(v) f(v) dv on the table's nodes.
inline double boundary_value(const KernelTable& t, const std::function<double(double)>& f_in) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.nodes.size(); ++i) s += t.dv_weights[i] * t.samples[i] * f_in(t.nodes[i]);
  return s;
}

/// Kernel curves at the n cell midpoints of (0, 1). Constant sigma gives
/// v,K0,K1,K2,K3; a multiplicative one gives v,Ksigma,Ksigma_app.
inline void write_kernel_csv(std::ostream& os, const CrossSection& sigma, int n = 200) {
  if (!sigma.is_multiplicative()) {
    throw Error("kernel curves need a multiplicative cross section, got '" + sigma.label() + "'");
  }
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = (i + 0.5) / n;
  const Vec w = Vec::Constant(n, 1.0 / n);
  os << std::setprecision(17);
  if (sigma.kind() == CrossSection::Kind::constant) {
    const auto k0 = kernel_on(KernelKind::K0, sigma, v, w);
    const auto k1 = kernel_on(KernelKind::K1, sigma, v, w);
    const auto k2 = kernel_on(KernelKind::K2, sigma, v, w);
    const auto k3 = kernel_on(KernelKind::K3, sigma, v, w);
    os << "v,K0,K1,K2,K3\n";
    for (int i = 0; i < n; ++i) {
      os << v[i] << ',' << k0.samples[i] << ',' << k1.samples[i] << ',' << k2.samples[i] << ',' << k3.samples[i]
         << '\n';
    }
    return;
  }
  const auto ks = kernel_on(KernelKind::Ksigma, sigma, v, w);
  const auto ka = kernel_on(KernelKind::Ksigma_app, sigma, v, w);
  os << "v,Ksigma,Ksigma_app\n";
  for (int i = 0; i < n; ++i) os << v[i] << ',' << ks.samples[i] << ',' << ka.samples[i] << '\n';
}

}  // namespace apbl
