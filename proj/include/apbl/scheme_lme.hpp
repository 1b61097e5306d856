#pragma once

// Micro-macro scheme with boundary unknowns g_0, g_{N+1} and boundary slopes
// lambda ~ eps d(rhobar)/dx, plus its small-epsilon limit: the flux-balance
// slope, the boundary kernel K_L and the limiting diffusion boundary value.

#include <cmath>
#include <sstream>

#include "apbl/kernel_table.hpp"
#include "apbl/scheme_common.hpp"
#include "apbl/scheme_naive.hpp"

namespace apbl {

namespace detail {

struct BoundarySolve {
  Vec g;
  double lambda = 0.0;
};

// Boundary unknown at one end, side = +1 on the left and -1 on the right.
// The outgoing part is affine in lambda: g = g_minus + u0 - lambda u1, with
// both pieces from the V+ block solve. lambda then follows from the discrete
// mass balance over the half cell next to the wall.
inline BoundarySolve solve_boundary(ProjectedOperator& po, double alpha, double eps, double dt, double dx,
                                    const Vec& g_minus, const Vec& g_old, const Vec& inner_old,
                                    const Vec& inner_new, int side, long step) {
  const VelocityGrid& grid = po.grid();
  const Vec& v = grid.nodes;
  const Vec v_e = v.cwiseProduct(grid.equilibrium);
  // Ghost extrapolation turns the transport difference into 2 (g_inner - g_b)/dx
  // on the left and 2 (g_b - g_inner)/dx on the right.
  const Vec diff = side > 0 ? Vec(inner_old - g_old) : Vec(g_old - inner_old);
  const Vec h0 = alpha * g_old - (2.0 * eps / dx) * po.project_out(v.cwiseProduct(diff));
  const Vec u0 = po.solve_halfrange(alpha, h0 + po.ltilde() * g_minus);
  const Vec u1 = po.solve_halfrange(alpha, po.project_out(v_e));
  const Vec big_g = g_minus + u0;

  auto mean = [&](const Vec& x) { return bracket_V(x, grid); };
  auto flux = [&](const Vec& x) { return bracket_V(v.cwiseProduct(x), grid); };
  double coef = 0.0;
  double rhs = 0.0;
  if (side > 0) {
    coef = -eps * dx * mean(u1) + 2.0 * dt * flux(u1);
    rhs = -eps * dx * (mean(big_g) - mean(g_old)) - 2.0 * dt * (flux(inner_new) - flux(big_g));
  } else {
    coef = -mean(u1) / dt - 2.0 * flux(u1) / (eps * dx);
    rhs = -(mean(big_g) - mean(g_old)) / dt - 2.0 / (eps * dx) * (flux(big_g) - flux(inner_new));
    // Normalize to the same scale as the left closure before the singularity test.
    coef *= eps * dx * dt;
    rhs *= eps * dx * dt;
  }
  if (!(std::abs(coef) >= 1e-14)) {
    std::ostringstream os;
    os << "lme: singular slope closure at the " << (side > 0 ? "left" : "right") << " boundary, step " << step
       << " (denominator " << coef << ")";
    throw Error(os.str());
  }
  BoundarySolve out;
  out.lambda = rhs / coef;
  if (!std::isfinite(out.lambda)) {
    std::ostringstream os;
    os << "lme: non-finite boundary slope at the " << (side > 0 ? "left" : "right") << " boundary, step " << step;
    throw Error(os.str());
  }
  out.g = big_g - out.lambda * u1;
  return out;
}

}  // namespace detail

/// One step of the boundary-layer scheme. step_index only labels errors.
inline MMState step_lme(const MMState& s, SchemeContext& ctx, double dt, Diagnostics* diag = nullptr,
                        long step_index = 0) {
  const int n = ctx.grid().interior;
  const double dx = ctx.grid().dx();
  const double eps = s.epsilon;
  const double alpha = eps * eps / dt;
  check_micro_macro_cfl(dt, dx, eps, "lme", diag);
  const Vec& v = ctx.velocity();
  const Vec& v_e = ctx.v_e();

  MMState next = s;
  next.time = s.time + dt;

  // Centered updates of the two midpoints next to the walls.
  {
    const Vec g1 = 0.5 * (s.g_mid.col(0) + s.g_mid.col(1));
    const Vec transport = v.cwiseProduct(g1 - s.g_left) / dx;
    const double drho = (s.rhobar[1] - s.rhobar[0]) / dx;
    next.g_mid.col(0) = detail::micro_update(ctx.mid(0), alpha, eps, s.g_mid.col(0), transport, v_e, drho);
  }
  {
    const Vec gn = 0.5 * (s.g_mid.col(n - 1) + s.g_mid.col(n));
    const Vec transport = v.cwiseProduct(s.g_right - gn) / dx;
    const double drho = (s.rhobar[n + 1] - s.rhobar[n]) / dx;
    next.g_mid.col(n) = detail::micro_update(ctx.mid(n), alpha, eps, s.g_mid.col(n), transport, v_e, drho);
  }

  const auto left = detail::solve_boundary(ctx.left(), alpha, eps, dt, dx, ctx.inflow_left(), s.g_left,
                                           s.g_mid.col(0), next.g_mid.col(0), +1, step_index);
  const auto right = detail::solve_boundary(ctx.right(), alpha, eps, dt, dx, ctx.inflow_right(), s.g_right,
                                            s.g_mid.col(n), next.g_mid.col(n), -1, step_index);
  next.g_left = left.g;
  next.g_right = right.g;
  next.lambda_l = left.lambda;
  next.lambda_r = right.lambda;
  next.rhobar[0] = ctx.boundary().rhobar_left;
  next.rhobar[n + 1] = ctx.boundary().rhobar_right;
  next.rho[0] = next.rhobar[0] + ctx.bracket(next.g_left);
  next.rho[n + 1] = next.rhobar[n + 1] + ctx.bracket(next.g_right);

  // Interior upwind updates.
  for (int i = 1; i <= n - 1; ++i) {
    const Vec c = s.g_mid.col(i);
    const Vec transport =
        detail::upwind_difference(v, s.g_mid.col(i - 1), c, s.g_mid.col(i + 1), dx);
    const double drho = (s.rhobar[i + 1] - s.rhobar[i]) / dx;
    next.g_mid.col(i) = detail::micro_update(ctx.mid(i), alpha, eps, c, transport, v_e, drho);
  }
  detail::macro_update(ctx, s, next, dt);
  return next;
}

namespace detail {

// Limit slope and outgoing part at one wall for incoming remainder g_minus:
// g_+ = -lambda s1 + s2 with <v (g_minus + g_+)> = 0.
inline BoundarySolve limit_boundary(ProjectedOperator& po, const Vec& g_minus) {
  const VelocityGrid& grid = po.grid();
  const Vec& v = grid.nodes;
  const Vec s1 = po.solve_halfrange(0.0, po.project_out(v.cwiseProduct(grid.equilibrium)));
  const Vec s2 = po.solve_halfrange(0.0, po.ltilde() * g_minus);
  const double den = bracket_V(v.cwiseProduct(s1), grid);
  if (!(std::abs(den) >= 1e-14)) throw Error("limit slope: vanishing denominator");
  BoundarySolve out;
  out.lambda = (bracket_V(v.cwiseProduct(g_minus), grid) + bracket_V(v.cwiseProduct(s2), grid)) / den;
  out.g = g_minus - out.lambda * s1 + s2;
  return out;
}

}  // namespace detail

/// Small-epsilon boundary slope for inflow f_in at the wall of mask, with
/// rhobar_b the half-range density of the data.
inline double limit_lambda(const CollisionOperator& op, const HalfRangeMask& mask, const Vec& f_in,
                           double rhobar_b) {
  ProjectedOperator po(op, mask);
  const Vec g_minus = po.restrict_minus(f_in - rhobar_b * op.grid().equilibrium);
  return detail::limit_boundary(po, g_minus).lambda;
}

/// rhobar - <v L^{-1}(I - Pi)(v g)> / kappa: the Dirichlet value the interior
/// diffusion scheme sees for a boundary remainder g.
inline double diffusion_boundary_value(const CollisionOperator& op, double rhobar, const Vec& g) {
  const VelocityGrid& grid = op.grid();
  const Vec& v = grid.nodes;
  Vec h = v.cwiseProduct(g);
  h -= bracket_V(h, grid) * grid.equilibrium;
  return rhobar - bracket_V(v.cwiseProduct(op.pseudo_inverse(h)), grid) / op.kappa();
}

/// Small-epsilon boundary value of the boundary-layer scheme for inflow f_in.
inline double lme_limit_boundary_value(const CollisionOperator& op, const HalfRangeMask& mask, const Vec& f_in) {
  ProjectedOperator po(op, mask);
  const double rbar = bracket_half(f_in, op.grid(), mask);
  const Vec g_minus = po.restrict_minus(f_in - rbar * op.grid().equilibrium);
  return diffusion_boundary_value(op, rbar, detail::limit_boundary(po, g_minus).g);
}

/// K_L at x = 0 on the positive nodes, from the limit functional applied to
/// each incoming basis vector.
inline KernelTable limit_kernel_lme(const CollisionOperator& op) {
  const HalfRangeMask mask = make_mask(op.grid(), 0.0);
  const auto m = op.size();
  Vec c = Vec::Zero(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!mask.minus[static_cast<std::size_t>(k)]) continue;
    Vec e = Vec::Zero(m);
    e[k] = 1.0;
    c[k] = lme_limit_boundary_value(op, mask, e);
  }
  return detail::kernel_from_functional(KernelKind::K_L_lme, op.grid(), c);
}

/// Explicit diffusion scheme the boundary-layer scheme reduces to as eps -> 0,
/// run from the same initial state: interior rho with Dirichlet values from
/// the boundary remainders. The first step uses the initial g_left/g_right,
/// later steps the limit remainders. Returns the rho history (one column per
/// step, including the initial one).
inline Mat lme_limit_trajectory(const MMState& init, const CollisionOperator& op, const BoundaryData& bd,
                                double dt, int steps) {
  const int n = init.interior();
  const double dx = 1.0 / (n + 1);
  const double k = op.kappa();
  const double lb = lme_limit_boundary_value(op, make_mask(op.grid(), 0.0), bd.f_left);
  const double rb = lme_limit_boundary_value(op, make_mask(op.grid(), 1.0), bd.f_right);
  Mat out(n + 2, steps + 1);
  Vec rho = init.rho;
  out.col(0) = rho;
  for (int s = 0; s < steps; ++s) {
    const double l = s == 0 ? diffusion_boundary_value(op, init.rhobar[0], init.g_left) : lb;
    const double r = s == 0 ? diffusion_boundary_value(op, init.rhobar[n + 1], init.g_right) : rb;
    Vec nxt = rho;
    for (int i = 1; i <= n; ++i) {
      const double lv = i == 1 ? l : rho[i - 1];
      const double rv = i == n ? r : rho[i + 1];
      nxt[i] = rho[i] + k * dt * (lv - 2.0 * rho[i] + rv) / (dx * dx);
    }
    nxt[0] = l;
    nxt[n + 1] = r;
    rho = nxt;
    out.col(s + 1) = rho;
  }
  return out;
}

}  // namespace apbl
