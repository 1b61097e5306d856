#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "apbl/grid_state.hpp"

using namespace apbl;

TEST(GridState, SpatialGridGeometry) {
  const SpatialGrid g(49);
  EXPECT_DOUBLE_EQ(g.dx(), 0.02);
  EXPECT_EQ(g.node_count(), 51);
  EXPECT_EQ(g.midpoint_count(), 50);
  EXPECT_DOUBLE_EQ(g.node(50), 1.0);
  EXPECT_DOUBLE_EQ(g.midpoint(0), 0.01);
  EXPECT_NEAR(g.midpoint(49), 0.99, 1e-15);
  EXPECT_THROW(SpatialGrid(0), Error);
}

TEST(GridState, BoundaryMomentsAreIncomingHalfMeans) {
  const auto vg = half_range_gauss_grid(16);
  const auto bd = make_boundary([](double v) { return std::abs(v); }, [](double v) { return v * v; }, vg);
  EXPECT_NEAR(bd.rhobar_left, 0.5, 1e-15);
  EXPECT_NEAR(bd.rhobar_right, 1.0 / 3.0, 1e-15);
  // Outgoing samples do not enter the moment.
  Vec l = bd.f_left;
  for (Eigen::Index k = 0; k < l.size(); ++k) {
    if (vg.nodes[k] < 0.0) l[k] = 100.0;
  }
  EXPECT_NEAR(make_boundary(l, bd.f_right, vg).rhobar_left, 0.5, 1e-15);
}

TEST(GridState, DecomposeReconstructsAndZeroesIncomingMean) {
  const auto vg = half_range_gauss_grid(16);
  Vec f(vg.nodes.size());
  for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = std::exp(vg.nodes[k]);
  for (double x : {0.0, 0.25, 0.5, 1.0}) {
    const auto mask = make_mask(vg, x);
    const auto [rbar, g] = decompose(f, vg, mask);
    EXPECT_NEAR((rbar * vg.equilibrium + g - f).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(bracket_half(g, vg, mask), 0.0, 1e-15);
  }
  // At x = 1/2 the incoming set is all of V, so rhobar = rho.
  const auto [rc, gc] = decompose(f, vg, make_mask(vg, 0.5));
  EXPECT_NEAR(rc, bracket_V(f, vg), 1e-15);
}

TEST(GridState, ZeroInitialDataWithZeroInflow) {
  const auto vg = half_range_gauss_grid(8);
  const auto bd = make_boundary([](double) { return 0.0; }, [](double) { return 0.0; }, vg);
  const auto s = init_state([](double, double) { return 0.0; }, SpatialGrid(9), vg, bd, 1e-3);
  EXPECT_EQ(s.interior(), 9);
  EXPECT_EQ(s.g_mid.cols(), 10);
  EXPECT_EQ(s.rho.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.g_mid.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.epsilon, 1e-3);
}

TEST(GridState, EquilibriumInitialDataHasNoRemainder) {
  const auto vg = half_range_gauss_grid(8);
  const double c = 0.7;
  const auto bd = make_boundary([c](double) { return c; }, [c](double) { return c; }, vg);
  const auto s = init_state([c](double, double) { return c; }, SpatialGrid(5), vg, bd, 0.1);
  EXPECT_NEAR((s.rho.array() - c).abs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR((s.rhobar.array() - c).abs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(s.g_mid.cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(s.g_left.cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(s.g_right.cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(GridState, WallTraceUsesInflowOnIncomingNodes) {
  const auto vg = half_range_gauss_grid(8);
  const auto bd = make_boundary([](double v) { return std::abs(v); }, [](double) { return 0.0; }, vg);
  const auto s = init_state([](double, double) { return 0.0; }, SpatialGrid(4), vg, bd, 1.0);
  EXPECT_NEAR(s.rhobar[0], 0.5, 1e-15);
  // rho_0 = <f_l 1_{v>0}>_V = 1/4
  EXPECT_NEAR(s.rho[0], 0.25, 1e-15);
  EXPECT_NEAR(bracket_half(s.g_left, vg, make_mask(vg, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(s.rho[5], 0.0, 1e-15);
  EXPECT_THROW(init_state([](double, double) { return 0.0; }, SpatialGrid(4), vg, bd, 0.0), Error);
}

TEST(GridState, StateCsvHasHeaderAndOneRowPerNode) {
  const auto vg = half_range_gauss_grid(8);
  const auto bd = make_boundary([](double) { return 1.0; }, [](double) { return 0.0; }, vg);
  const SpatialGrid sg(6);
  const auto s = init_state([](double, double) { return 0.0; }, sg, vg, bd, 1.0);
  std::ostringstream os;
  write_state_csv(os, s, sg);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("x,", 0), 0u);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, sg.node_count());
}
