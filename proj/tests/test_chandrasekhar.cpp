#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "apbl/chandrasekhar.hpp"

using namespace apbl;

namespace {

// Closed-form H for conservative isotropic scattering:
// ln H(mu) = -(mu/pi) int_0^{pi/2} ln(1 - t cot t) / (cos^2 t + mu^2 sin^2 t) dt.
double h_closed_form(double mu) {
  // log(1 - t cot t), by its series near 0 where the difference cancels.
  auto log_term = [](double t) {
    if (t < 1e-3) {
      const double t2 = t * t;
      return 2.0 * std::log(t) - std::log(3.0) + std::log1p(t2 / 15.0 + 2.0 * t2 * t2 / 315.0);
    }
    return std::log(1.0 - t / std::tan(t));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  const double s = ts.integrate(
      [&](double t) {
        const double c = std::cos(t);
        const double sn = std::sin(t);
        return log_term(t) / (c * c + mu * mu * sn * sn);
      },
      0.0, std::numbers::pi / 2.0);
  return std::exp(-mu / std::numbers::pi * s);
}

double chandrasekhar_value(const HFunction& h) {
  return std::sqrt(3.0) / 2.0 * h.quad.weights.dot(h.quad.nodes.cwiseProduct(h.quad.nodes).cwiseProduct(h.values));
}

}  // namespace

TEST(Chandrasekhar, ConstantHSolvesItsEquation) {
  const auto h = solve_H_constant(unit_gauss(64));
  EXPECT_LE(h.residual, 1e-12);
  EXPECT_GE(h.values.minCoeff(), 1.0);
  for (Eigen::Index i = 1; i < h.values.size(); ++i) EXPECT_GE(h.values[i], h.values[i - 1]);
  // Zeroth moment of H is 2 in the conservative case.
  EXPECT_NEAR(h.quad.weights.dot(h.values), 2.0, 1e-6);
  EXPECT_NEAR(h(1e-12), 1.0, 1e-9);
}

TEST(Chandrasekhar, ConstantHMatchesClosedForm) {
  const auto h = solve_H_constant(unit_gauss(64));
  for (double mu : {0.01, 0.1, 0.3, 0.5, 0.77, 0.95, 1.0}) {
    EXPECT_NEAR(h(mu), h_closed_form(mu), 2e-6) << mu;
  }
  EXPECT_NEAR(h_closed_form(1.0), 2.9078, 1e-4);
}

TEST(Chandrasekhar, ExtrapolatedValue) {
  const auto h = solve_H_constant(unit_gauss(64));
  EXPECT_NEAR(chandrasekhar_value(h), 0.7104, 5e-4);
  // Same value through the exact kernel K0 applied to f = v.
  const auto k0 = kernel(KernelKind::K0, CrossSection::constant(), half_range_gauss_grid(64));
  EXPECT_NEAR(boundary_value(k0, [](double v) { return v; }), chandrasekhar_value(h), 1e-6);
}

TEST(Chandrasekhar, GeneralSolverReducesToConstant) {
  const auto q = unit_gauss(32);
  const auto a = solve_H_constant(q);
  const auto b = solve_H_general([](double) { return 3.0; }, q);
  // The conservative equation is critical, so a 1e-13 residual leaves
  // roughly 1e-9 in the values.
  EXPECT_LE((a.values - b.values).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Chandrasekhar, GeneralHForPowerCrossSections) {
  for (const auto& sigma : {CrossSection::abs_pow(1.5), CrossSection::one_minus_v2_pow(-0.75)}) {
    const auto h = solve_H(sigma);
    EXPECT_LE(h.residual, 1e-12) << sigma.label();
    EXPECT_GE(h.values.minCoeff(), 1.0 - 1e-14);
    const ExactKernel k(sigma);
    double integral = 0.0;
    for (Eigen::Index i = 0; i < h.quad.nodes.size(); ++i) integral += h.quad.weights[i] * k(h.quad.nodes[i]);
    EXPECT_NEAR(integral, 1.0, 1e-6) << sigma.label();
  }
  EXPECT_THROW(solve_H(CrossSection::abs_diff_pow(5.0)), Error);
}

TEST(Chandrasekhar, ConstantCoefficientsAreExact) {
  const auto c = kernel_coefficients(CrossSection::constant());
  EXPECT_DOUBLE_EQ(c.a, 1.5);
  EXPECT_NEAR(c.b, 15.0 / 14.0, 1e-15);
  EXPECT_NEAR(c.c, -1.0 / 28.0, 1e-15);
  EXPECT_EQ(c.d, 0.0);
  EXPECT_NEAR(c.kappa, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(c.first_moment(), 5.0 / 7.0, 1e-15);
}

TEST(Chandrasekhar, ClosedFormMomentsMatchQuadrature) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto unit = [&](auto f) { return ts.integrate(f, 0.0, 1.0); };
  // abs_pow(1.5): each moment is a single power of v.
  const auto a = kernel_coefficients(CrossSection::abs_pow(1.5));
  EXPECT_NEAR(a.alpha, unit([](double v) { return std::pow(v, 1.5); }), 1e-12);
  EXPECT_NEAR(a.gamma, unit([](double v) { return std::pow(v, 0.5); }), 1e-12);
  EXPECT_NEAR(a.delta, 1.0, 1e-15);
  EXPECT_NEAR(a.v3_over_p, unit([](double v) { return std::pow(v, 1.5); }), 1e-12);
  EXPECT_NEAR(a.v_p, unit([](double v) { return std::pow(v, 2.5); }), 1e-12);
  EXPECT_NEAR(a.kappa, 5.0 / 3.0, 1e-14);
  EXPECT_EQ(a.d, 0.0);
  // (1 - v^2)^q: with v = cos u the singular factor becomes sin(u)^(2s+1).
  const double q = -0.75;
  const auto c = kernel_coefficients(CrossSection::one_minus_v2_pow(q));
  auto moment = [&](int m, double s) {
    return ts.integrate(
        [&](double u) { return std::pow(std::abs(std::cos(u)), m) * std::pow(std::sin(u), 2.0 * s + 1.0); }, 0.0,
        std::numbers::pi / 2.0);
  };
  EXPECT_NEAR(c.alpha, moment(0, q), 1e-9);
  EXPECT_NEAR(c.gamma, moment(2, -q), 1e-9);
  EXPECT_NEAR(c.delta, moment(3, -2.0 * q), 1e-9);
  EXPECT_NEAR(c.v3_over_p, moment(3, -q), 1e-9);
  EXPECT_NEAR(c.v_p, moment(1, q), 1e-9);
  EXPECT_EQ(c.d, 0.0);
}

TEST(Chandrasekhar, GenericFactorUsesQuadrature) {
  // p = 1 + v^2 has elementary moments.
  const auto k = kernel_coefficients([](double v) { return 1.0 + v * v; });
  EXPECT_NEAR(k.alpha, 4.0 / 3.0, 1e-13);
  EXPECT_NEAR(k.gamma, 1.0 - std::numbers::pi / 4.0, 1e-13);
  EXPECT_NEAR(k.delta, 0.5 * (std::numbers::ln2 - 0.5), 1e-13);
  EXPECT_NEAR(k.v3_over_p, 0.5 * (1.0 - std::numbers::ln2), 1e-13);
  EXPECT_NEAR(k.v_p, 0.75, 1e-13);
  EXPECT_NEAR(k.kappa, k.gamma / k.alpha, 1e-15);
}

TEST(Chandrasekhar, PolynomialKernelMomentsAndNormalization) {
  const auto g = half_range_gauss_grid(32);
  const auto sigma = CrossSection::constant();
  auto first = [](const KernelTable& t) { return boundary_value(t, [](double v) { return v; }); };
  EXPECT_NEAR(kernel(KernelKind::K1, sigma, g).integral(), 1.0, 1e-14);
  EXPECT_NEAR(kernel(KernelKind::K2, sigma, g).integral(), 1.0, 1e-14);
  EXPECT_NEAR(kernel(KernelKind::K3, sigma, g).integral(), 1.0, 1e-14);
  EXPECT_NEAR(kernel(KernelKind::K0, sigma, g).integral(), 1.0, 1e-6);
  EXPECT_NEAR(first(kernel(KernelKind::K1, sigma, g)), 17.0 / 24.0, 1e-14);
  EXPECT_NEAR(first(kernel(KernelKind::K2, sigma, g)), 0.75, 1e-14);
  EXPECT_NEAR(first(kernel(KernelKind::K3, sigma, g)), 5.0 / 7.0, 1e-14);
  EXPECT_NEAR(boundary_value(kernel(KernelKind::K0, sigma, g), [](double) { return 1.0; }), 1.0, 1e-6);
}

TEST(Chandrasekhar, KernelOrderingAgainstExact) {
  const int n = 400;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = (i + 0.5) / n;
  const Vec w = Vec::Constant(n, 1.0 / n);
  const auto sigma = CrossSection::constant();
  const Vec k0 = kernel_on(KernelKind::K0, sigma, v, w).samples;
  const double gap1 = (kernel_on(KernelKind::K1, sigma, v, w).samples - k0).cwiseAbs().maxCoeff();
  const double gap2 = (kernel_on(KernelKind::K2, sigma, v, w).samples - k0).cwiseAbs().maxCoeff();
  const double gap3 = (kernel_on(KernelKind::K3, sigma, v, w).samples - k0).cwiseAbs().maxCoeff();
  EXPECT_LT(gap3, 0.05);
  EXPECT_LT(gap1, 0.1);
  EXPECT_GT(gap2, 0.15);
  EXPECT_LT(gap3, gap2);
}

TEST(Chandrasekhar, ApproximateKernelOfConstantIsK3) {
  const auto g = half_range_gauss_grid(16);
  const auto app = kernel(KernelKind::Ksigma_app, CrossSection::constant(), g);
  const auto k3 = kernel(KernelKind::K3, CrossSection::constant(), g);
  EXPECT_LE((app.samples - k3.samples).cwiseAbs().maxCoeff(), 1e-14);
  ASSERT_TRUE(app.coefficients.has_value());
}

TEST(Chandrasekhar, GridOnlyKernelsRequireAVelocityGrid) {
  const Vec v = Vec::Constant(1, 0.5);
  EXPECT_THROW(kernel_on(KernelKind::K_L_lme, CrossSection::constant(), v, v), Error);
  const auto t = kernel(KernelKind::K_L_naive, CrossSection::constant(), half_range_gauss_grid(8));
  EXPECT_EQ(t.kind, KernelKind::K_L_naive);
}

TEST(Chandrasekhar, KernelCsvColumns) {
  std::ostringstream a;
  write_kernel_csv(a, CrossSection::constant(), 10);
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "v,K0,K1,K2,K3");
  std::ostringstream b;
  write_kernel_csv(b, CrossSection::one_minus_v2_pow(-0.75), 10);
  const std::string s = b.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "v,Ksigma,Ksigma_app");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 11);
  EXPECT_EQ(s.find("inf"), std::string::npos);
  EXPECT_EQ(s.find("nan"), std::string::npos);
  std::ostringstream c;
  EXPECT_THROW(write_kernel_csv(c, CrossSection::abs_diff_pow(-0.5)), Error);
}
