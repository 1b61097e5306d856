#pragma once

// Reference solvers: a fully explicit upwind scheme for the kinetic equation
// and an explicit three-point scheme for the limiting diffusion equation.

#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "apbl/collision.hpp"
#include "apbl/error.hpp"
#include "apbl/grid_state.hpp"

namespace apbl {

/// Kinetic solution on the vertex grid x_i = i/(cells+1), i = 0..cells+1.
/// Column i of f holds the velocity samples at x_i. The wall columns keep the
/// inflow data on incoming nodes and evolve their outgoing nodes.
struct KineticField {
  Mat f;
  double time = 0.0;
  double epsilon = 1.0;

  [[nodiscard]] int cells() const noexcept { return static_cast<int>(f.cols()) - 2; }
  [[nodiscard]] double dx() const noexcept { return 1.0 / (cells() + 1); }
  [[nodiscard]] double x(int i) const noexcept { return i * dx(); }
};

/// rho(x_i) = <f_i>_V.
inline Vec kinetic_density(const KineticField& k, const VelocityGrid& grid) {
  return (grid.mu_weights.transpose() * k.f).transpose() / grid.equilibrium_mass();
}

/// Zero initial data (or f_init) with the inflow written into the walls.
inline KineticField init_kinetic(int cells, const VelocityGrid& grid, const BoundaryData& bd, double epsilon,
                                 const std::function<double(double, double)>& f_init = {}) {
  if (cells < 1) throw Error("kinetic reference needs at least one cell");
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  const auto m = static_cast<Eigen::Index>(grid.size());
  KineticField k;
  k.epsilon = epsilon;
  k.f = Mat::Zero(m, cells + 2);
  if (f_init) {
    for (int i = 0; i < cells + 2; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) k.f(j, i) = f_init(k.x(i), grid.nodes[j]);
    }
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    if (grid.nodes[j] > 0.0) k.f(j, 0) = bd.f_left[j];
    if (grid.nodes[j] < 0.0) k.f(j, cells + 1) = bd.f_right[j];
  }
  return k;
}

/// Most negative eigenvalue of L (L is self-adjoint in the weighted inner
/// product, so its symmetrized form has the same real spectrum).
inline double collision_spectral_radius(const CollisionOperator& op) {
  const Mat s = mu_symmetrized(op.matrix(), op.grid());
  const Mat sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return std::abs(es.eigenvalues().minCoeff());
}

/// Largest stable step with safety factor 0.9: dt (v_max/(eps dx) + |lambda_min|/eps^2) <= 0.9.
inline double kinetic_time_step(const CollisionOperator& op, double dx, double epsilon) {
  return 0.9 / (op.grid().max_speed() / (epsilon * dx) + collision_spectral_radius(op) / (epsilon * epsilon));
}

/// Explicit upwind step. Throws when dt violates the monotonicity bound;
/// this is the trusted oracle and must not run unstably. spectral_radius may
/// be passed in to avoid recomputing the eigenvalues every step.
inline void step_explicit_kinetic(KineticField& k, const CollisionOperator& op, const BoundaryData& bd, double dt,
                                  double spectral_radius = -1.0) {
  const VelocityGrid& grid = op.grid();
  const double eps = k.epsilon;
  const double dx = k.dx();
  const double rad = spectral_radius >= 0.0 ? spectral_radius : collision_spectral_radius(op);
  const double bound = 1.0 / (grid.max_speed() / (eps * dx) + rad / (eps * eps));
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "explicit kinetic step: dt = " << dt << " violates the stability bound " << bound;
    throw Error(os.str());
  }
  const int last = k.cells() + 1;
  const Mat collide = op.matrix() * k.f;
  Mat next = k.f + (dt / (eps * eps)) * collide;
  const double c = dt / (eps * dx);
  for (Eigen::Index j = 0; j < k.f.rows(); ++j) {
    const double v = grid.nodes[j];
    if (v > 0.0) {
      for (int i = 1; i <= last; ++i) next(j, i) -= c * v * (k.f(j, i) - k.f(j, i - 1));
      next(j, 0) = bd.f_left[j];
    } else if (v < 0.0) {
      for (int i = 0; i < last; ++i) next(j, i) -= c * v * (k.f(j, i + 1) - k.f(j, i));
      next(j, last) = bd.f_right[j];
    }
  }
  k.f = std::move(next);
  k.time += dt;
}

/// Explicit diffusion step on node values rho_0..rho_{N+1} with Dirichlet ends.
inline Vec step_diffusion(const Vec& rho, double kappa, double dt, double left, double right) {
  const auto n = rho.size();
  if (n < 3) throw Error("diffusion step needs at least one interior node");
  const double dx = 1.0 / static_cast<double>(n - 1);
  if (dt > dx * dx / (2.0 * kappa) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "diffusion step: dt = " << dt << " exceeds dx^2/(2 kappa) = " << dx * dx / (2.0 * kappa);
    throw Error(os.str());
  }
  Vec out(n);
  out[0] = left;
  out[n - 1] = right;
  const double r = kappa * dt / (dx * dx);
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    const double l = i == 1 ? left : rho[i - 1];
    const double rr = i == n - 2 ? right : rho[i + 1];
    out[i] = rho[i] + r * (l - 2.0 * rho[i] + rr);
  }
  return out;
}

}  // namespace apbl
