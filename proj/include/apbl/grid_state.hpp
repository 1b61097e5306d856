#pragma once

// Staggered spatial grid on [0, 1], boundary data and the micro-macro state
// f = rhobar E + g.

#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>

#include <Eigen/Dense>

#include "apbl/error.hpp"
#include "apbl/vquad.hpp"

namespace apbl {

/// Nodes x_i = i dx (i = 0..N+1) and midpoints x_{i+1/2} (i = 0..N), dx = 1/(N+1).
struct SpatialGrid {
  int interior = 1;

  explicit SpatialGrid(int n) : interior(n) {
    if (n < 1) throw Error("spatial grid needs at least one interior node");
  }

  [[nodiscard]] double dx() const noexcept { return 1.0 / (interior + 1); }
  [[nodiscard]] int node_count() const noexcept { return interior + 2; }
  [[nodiscard]] int midpoint_count() const noexcept { return interior + 1; }
  [[nodiscard]] double node(int i) const noexcept { return i * dx(); }
  [[nodiscard]] double midpoint(int i) const noexcept { return (i + 0.5) * dx(); }
};

/// Inflow data f_l on V-(0) = {v > 0} and f_r on V-(1) = {v < 0}, with the
/// boundary-matching densities rhobar_0 = <f_l>_{V-(0)}, rhobar_{N+1} = <f_r>_{V-(1)}.
struct BoundaryData {
  Vec f_left;
  Vec f_right;
  double rhobar_left = 0.0;
  double rhobar_right = 0.0;
};

inline std::pair<double, double> boundary_moments(const Vec& f_left, const Vec& f_right, const VelocityGrid& grid) {
  return {bracket_half(f_left, grid, make_mask(grid, 0.0)), bracket_half(f_right, grid, make_mask(grid, 1.0))};
}

inline BoundaryData make_boundary(Vec f_left, Vec f_right, const VelocityGrid& grid) {
  BoundaryData b;
  std::tie(b.rhobar_left, b.rhobar_right) = boundary_moments(f_left, f_right, grid);
  b.f_left = std::move(f_left);
  b.f_right = std::move(f_right);
  return b;
}

/// Boundary data sampled from functions of v.
inline BoundaryData make_boundary(const std::function<double(double)>& f_left,
                                  const std::function<double(double)>& f_right, const VelocityGrid& grid) {
  Vec l(grid.nodes.size());
  Vec r(grid.nodes.size());
  for (Eigen::Index k = 0; k < grid.nodes.size(); ++k) {
    l[k] = f_left(grid.nodes[k]);
    r[k] = f_right(grid.nodes[k]);
  }
  return make_boundary(std::move(l), std::move(r), grid);
}

/// Micro-macro state at t_n. rho and rhobar live on nodes 0..N+1, g_mid holds
/// one column per midpoint 0..N, g_left/g_right are the full-V boundary
/// remainders, lambda_l/lambda_r approximate eps d(rhobar)/dx at x = 0, 1.
struct MMState {
  Vec rho;
  Vec rhobar;
  Mat g_mid;
  Vec g_left;
  Vec g_right;
  double lambda_l = 0.0;
  double lambda_r = 0.0;
  double time = 0.0;
  double epsilon = 1.0;

  [[nodiscard]] int interior() const noexcept { return static_cast<int>(rho.size()) - 2; }
};

/// Splits f into (<f>_{V-}, (I - Pi_{V-}) f).
inline std::pair<double, Vec> decompose(const Vec& f, const VelocityGrid& grid, const HalfRangeMask& mask) {
  const double rbar = bracket_half(f, grid, mask);
  return {rbar, f - rbar * grid.equilibrium};
}

/// Initializes from f_init(x, v). Interior quantities follow the natural
/// discretization; at x = 0 and x = 1 the trace is f_init on outgoing
/// velocities and the inflow data on incoming ones, so rhobar at the ends
/// always equals the boundary moment.
inline MMState init_state(const std::function<double(double, double)>& f_init, const SpatialGrid& sgrid,
                          const VelocityGrid& vgrid, const BoundaryData& boundary, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  const int n = sgrid.interior;
  const auto m = static_cast<Eigen::Index>(vgrid.size());
  auto sample = [&](double x) {
    Vec f(m);
    for (Eigen::Index k = 0; k < m; ++k) f[k] = f_init(x, vgrid.nodes[k]);
    return f;
  };

  MMState s;
  s.epsilon = epsilon;
  s.rho = Vec::Zero(n + 2);
  s.rhobar = Vec::Zero(n + 2);
  s.g_mid = Mat::Zero(m, n + 1);
  for (int i = 1; i <= n; ++i) {
    const double x = sgrid.node(i);
    const Vec f = sample(x);
    s.rho[i] = bracket_V(f, vgrid);
    s.rhobar[i] = bracket_half(f, vgrid, make_mask(vgrid, x));
  }
  for (int i = 0; i <= n; ++i) {
    const double x = sgrid.midpoint(i);
    s.g_mid.col(i) = project_out(sample(x), vgrid, make_mask(vgrid, x));
  }

  auto trace = [&](double x, const Vec& inflow) {
    const HalfRangeMask mask = make_mask(vgrid, x);
    Vec f = sample(x);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (mask.minus[static_cast<std::size_t>(k)]) f[k] = inflow[k];
    }
    return f;
  };
  const Vec f0 = trace(0.0, boundary.f_left);
  const Vec f1 = trace(1.0, boundary.f_right);
  s.rhobar[0] = boundary.rhobar_left;
  s.rhobar[n + 1] = boundary.rhobar_right;
  s.g_left = f0 - boundary.rhobar_left * vgrid.equilibrium;
  s.g_right = f1 - boundary.rhobar_right * vgrid.equilibrium;
  s.rho[0] = bracket_V(f0, vgrid);
  s.rho[n + 1] = bracket_V(f1, vgrid);
  return s;
}

/// Snapshot with columns x, rho, rhobar, one row per node.
inline void write_state_csv(std::ostream& os, const MMState& s, const SpatialGrid& grid) {
  os << "x,rho,rhobar\n" << std::setprecision(17);
  for (int i = 0; i < grid.node_count(); ++i) {
    os << grid.node(i) << ',' << s.rho[i] << ',' << s.rhobar[i] << '\n';
  }
}

}  // namespace apbl
