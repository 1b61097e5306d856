#include <gtest/gtest.h>

#include <cmath>

#include "apbl/reference.hpp"

using namespace apbl;

namespace {

double zero(double) { return 0.0; }

Vec diffuse(Vec rho, double kappa, double dt, int steps) {
  const auto n = rho.size();
  for (int s = 0; s < steps; ++s) rho = step_diffusion(rho, kappa, dt, rho[0], rho[n - 1]);
  return rho;
}

}  // namespace

TEST(Reference, KineticEquilibriumIsAFixedPoint) {
  const auto vg = half_range_gauss_grid(16);
  const auto op = assemble_L(CrossSection::abs_diff_pow(5.0), vg);
  const double c = 0.4;
  const auto bd = make_boundary([c](double) { return c; }, [c](double) { return c; }, vg);
  auto k = init_kinetic(50, vg, bd, 1e-2, [c](double, double) { return c; });
  const double dt = kinetic_time_step(op, k.dx(), k.epsilon);
  for (int n = 0; n < 200; ++n) step_explicit_kinetic(k, op, bd, dt);
  EXPECT_LE((kinetic_density(k, vg).array() - c).abs().maxCoeff(), 1e-12);
}

TEST(Reference, KineticZeroStaysZeroAndTimeAdvances) {
  const auto vg = half_range_gauss_grid(8);
  const auto op = assemble_L(CrossSection::constant(), vg);
  const auto bd = make_boundary(zero, zero, vg);
  auto k = init_kinetic(20, vg, bd, 1.0);
  const double dt = kinetic_time_step(op, k.dx(), 1.0);
  for (int n = 0; n < 10; ++n) step_explicit_kinetic(k, op, bd, dt);
  EXPECT_EQ(k.f.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(k.time, 10 * dt, 1e-15);
}

TEST(Reference, KineticStepRejectsUnstableTimeStep) {
  const auto vg = half_range_gauss_grid(8);
  const auto op = assemble_L(CrossSection::constant(), vg);
  const auto bd = make_boundary([](double) { return 1.0; }, zero, vg);
  auto k = init_kinetic(20, vg, bd, 1e-2);
  const double dt = kinetic_time_step(op, k.dx(), k.epsilon);
  EXPECT_NO_THROW(step_explicit_kinetic(k, op, bd, dt));
  EXPECT_THROW(step_explicit_kinetic(k, op, bd, 1.2 * dt / 0.9), Error);
}

TEST(Reference, KineticSchemeIsMonotone) {
  // Under the step bound every update is a convex combination, so values
  // stay within the range of initial and inflow data.
  const auto vg = half_range_gauss_grid(16);
  const auto op = assemble_L(CrossSection::abs_diff_pow(-0.5), vg);
  const auto bd = make_boundary([](double v) { return std::abs(v); }, zero, vg);
  auto k = init_kinetic(40, vg, bd, 0.1);
  const double dt = kinetic_time_step(op, k.dx(), k.epsilon);
  for (int n = 0; n < 300; ++n) {
    step_explicit_kinetic(k, op, bd, dt);
    ASSERT_GE(k.f.minCoeff(), -1e-14);
    ASSERT_LE(k.f.maxCoeff(), vg.max_speed() + 1e-14);
  }
}

TEST(Reference, KineticFirstOrderConvergenceAtUnitEpsilon) {
  // Successive differences of the density shrink by about 2 per refinement.
  const auto vg = half_range_gauss_grid(16);
  const auto op = assemble_L(CrossSection::constant(), vg);
  const auto bd = make_boundary([](double) { return 1.0; }, zero, vg);
  const double t_end = 0.25;
  auto solve = [&](int cells) {
    auto k = init_kinetic(cells, vg, bd, 1.0);
    const double rad = collision_spectral_radius(op);
    const double dt0 = kinetic_time_step(op, k.dx(), 1.0);
    const int steps = static_cast<int>(std::ceil(t_end / dt0));
    for (int n = 0; n < steps; ++n) step_explicit_kinetic(k, op, bd, t_end / steps, rad);
    return kinetic_density(k, vg);
  };
  // Nested vertex grids: cells + 1 = 50, 100, 200.
  const Vec r1 = solve(49);
  const Vec r2 = solve(99);
  const Vec r3 = solve(199);
  double d12 = 0.0;
  double d23 = 0.0;
  for (int i = 0; i <= 50; ++i) {
    d12 = std::max(d12, std::abs(r1[i] - r2[2 * i]));
    d23 = std::max(d23, std::abs(r2[2 * i] - r3[4 * i]));
  }
  EXPECT_GT(d12 / d23, 1.6);
  EXPECT_LT(d12 / d23, 2.5);
}

TEST(Reference, DiffusionKeepsLinearProfilesAndConstants) {
  const int n = 21;
  Vec lin(n);
  for (int i = 0; i < n; ++i) lin[i] = 0.2 + 0.5 * i / (n - 1.0);
  const double dx = 1.0 / (n - 1);
  const double kappa = 1.0 / 3.0;
  const double dt = 0.45 * dx * dx / kappa;
  EXPECT_LE((diffuse(lin, kappa, dt, 500) - lin).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LE((diffuse(Vec::Constant(n, 0.3), kappa, dt, 500).array() - 0.3).abs().maxCoeff(), 1e-14);
}

TEST(Reference, DiffusionMaximumPrincipleAndSteadyState) {
  const int n = 41;
  Vec rho = Vec::Zero(n);
  rho[0] = 0.71;
  const double dx = 1.0 / (n - 1);
  const double kappa = 5.0 / 3.0;
  const double dt = 0.45 * dx * dx / kappa;
  for (int s = 0; s < 20000; ++s) {
    rho = step_diffusion(rho, kappa, dt, 0.71, 0.0);
    ASSERT_GE(rho.minCoeff(), 0.0);
    ASSERT_LE(rho.maxCoeff(), 0.71);
  }
  for (int i = 0; i < n; ++i) EXPECT_NEAR(rho[i], 0.71 * (1.0 - i * dx), 1e-8);
}

TEST(Reference, DiffusionRejectsUnstableStepAndTinyGrids) {
  const Vec rho = Vec::Zero(11);
  EXPECT_THROW(step_diffusion(rho, 1.0, 0.51 * 0.01, 1.0, 0.0), Error);
  EXPECT_NO_THROW(step_diffusion(rho, 1.0, 0.5 * 0.01, 1.0, 0.0));
  EXPECT_THROW(step_diffusion(Vec::Zero(2), 1.0, 1e-6, 0.0, 0.0), Error);
}

TEST(Reference, SpectralRadiusOfConstantOperatorIsOne) {
  const auto vg = half_range_gauss_grid(16);
  EXPECT_NEAR(collision_spectral_radius(assemble_L(CrossSection::constant(), vg)), 1.0, 1e-12);
  EXPECT_NEAR(collision_spectral_radius(assemble_L(CrossSection::constant(2.0), vg)), 2.0, 1e-12);
}
