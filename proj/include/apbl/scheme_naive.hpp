#pragma once

// Micro-macro scheme without boundary-layer treatment. Its small-epsilon
// boundary value is the kernel K2 = 3 v^2 for sigma = 1, which is not the
// correct Chandrasekhar value; kept as a baseline.

#include <cmath>
#include <limits>
#include <sstream>

#include "apbl/kernel_table.hpp"
#include "apbl/scheme_common.hpp"

namespace apbl {

namespace detail {

// Ghost g_{-1/2} (or g_{N+3/2}) from g_b = (ghost + g_inner)/2 on the incoming
// nodes of the boundary mask. Outgoing entries are NaN so any accidental read
// shows up in the flux check.
inline Vec naive_ghost(const ProjectedOperator& boundary, const Vec& g_boundary, const Vec& g_inner) {
  Vec ghost = Vec::Constant(g_inner.size(), std::numeric_limits<double>::quiet_NaN());
  const auto& minus = boundary.mask().minus;
  for (std::size_t k = 0; k < minus.size(); ++k) {
    if (minus[k]) {
      const auto kk = static_cast<Eigen::Index>(k);
      ghost[kk] = 2.0 * g_boundary[kk] - g_inner[kk];
    }
  }
  return ghost;
}

inline void check_finite_transport(const Vec& t, const char* where) {
  if (!t.allFinite()) {
    throw Error(std::string("naive scheme: outgoing ghost value referenced at the ") + where + " boundary");
  }
}

}  // namespace detail

/// One step of the scheme without boundary treatment. Boundary rho is left
/// untouched.
inline MMState step_naive(const MMState& s, SchemeContext& ctx, double dt, Diagnostics* diag = nullptr) {
  const int n = ctx.grid().interior;
  const double dx = ctx.grid().dx();
  const double eps = s.epsilon;
  const double alpha = eps * eps / dt;
  check_micro_macro_cfl(dt, dx, eps, "naive", diag);

  const Vec& v = ctx.velocity();
  const Vec g0 = ctx.inflow_left();
  const Vec gn1 = ctx.inflow_right();
  const Vec ghost_l = detail::naive_ghost(ctx.left(), g0, s.g_mid.col(0));
  const Vec ghost_r = detail::naive_ghost(ctx.right(), gn1, s.g_mid.col(n));

  MMState next = s;
  next.time = s.time + dt;
  for (int i = 0; i <= n; ++i) {
    const Vec c = s.g_mid.col(i);
    const Vec l = (i == 0) ? ghost_l : Vec(s.g_mid.col(i - 1));
    const Vec r = (i == n) ? ghost_r : Vec(s.g_mid.col(i + 1));
    const Vec transport = detail::upwind_difference(v, l, c, r, dx);
    if (i == 0) detail::check_finite_transport(transport, "left");
    if (i == n) detail::check_finite_transport(transport, "right");
    const double drho = (s.rhobar[i + 1] - s.rhobar[i]) / dx;
    next.g_mid.col(i) = detail::micro_update(ctx.mid(i), alpha, eps, c, transport, ctx.v_e(), drho);
  }
  detail::macro_update(ctx, s, next, dt);
  return next;
}

namespace detail {

// Coefficients c with value = sum_k c_k f_k of the functional
// f -> 2 <v L^{-1}(I - Pi)(v 1_{V-} f)> / <v L^{-1}(v E)>, one basis vector
// per incoming node.
inline Vec naive_functional(const CollisionOperator& op, const HalfRangeMask& mask) {
  const VelocityGrid& g = op.grid();
  const auto m = op.size();
  const Vec v = g.nodes;
  const double denom = bracket_V(v.cwiseProduct(op.pseudo_inverse(v.cwiseProduct(g.equilibrium))), g);
  Vec c = Vec::Zero(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!mask.minus[static_cast<std::size_t>(k)]) continue;
    Vec h = Vec::Zero(m);
    h[k] = v[k];
    h -= bracket_V(h, g) * g.equilibrium;
    c[k] = 2.0 * bracket_V(v.cwiseProduct(op.pseudo_inverse(h)), g) / denom;
  }
  return c;
}

inline KernelTable kernel_from_functional(KernelKind kind, const VelocityGrid& g, const Vec& c) {
  // Incoming set at x = 0 is v > 0; report on those nodes in ascending order.
  std::vector<Eigen::Index> idx;
  for (Eigen::Index k = 0; k < g.nodes.size(); ++k) {
    if (g.nodes[k] > 0.0) idx.push_back(k);
  }
  KernelTable t;
  t.kind = kind;
  const auto n = static_cast<Eigen::Index>(idx.size());
  t.nodes.resize(n);
  t.dv_weights.resize(n);
  t.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = idx[static_cast<std::size_t>(i)];
    t.nodes[i] = g.nodes[k];
    t.dv_weights[i] = 2.0 * g.mu_weights[k];
    t.samples[i] = c[k] / t.dv_weights[i];
  }
  return t;
}

}  // namespace detail

/// Small-epsilon boundary value of the naive scheme for inflow data f_in on
/// the incoming nodes of mask.
inline double naive_limit_boundary_value(const CollisionOperator& op, const HalfRangeMask& mask, const Vec& f_in) {
  return detail::naive_functional(op, mask).dot(f_in);
}

/// Kernel of the naive scheme at x = 0, sampled on the positive nodes.
inline KernelTable limit_kernel_naive(const CollisionOperator& op) {
  const Vec c = detail::naive_functional(op, make_mask(op.grid(), 0.0));
  return detail::kernel_from_functional(KernelKind::K_L_naive, op.grid(), c);
}

/// Explicit diffusion scheme the naive scheme reduces to as eps -> 0, run
/// from the same initial state. Its boundary value is time independent.
/// Returns the rho history, one column per step including the initial one.
inline Mat naive_limit_trajectory(const MMState& init, const CollisionOperator& op, const BoundaryData& bd,
                                  double dt, int steps) {
  const int n = init.interior();
  const double dx = 1.0 / (n + 1);
  const double k = op.kappa();
  const double l = naive_limit_boundary_value(op, make_mask(op.grid(), 0.0), bd.f_left);
  const double r = naive_limit_boundary_value(op, make_mask(op.grid(), 1.0), bd.f_right);
  Mat out(n + 2, steps + 1);
  Vec rho = init.rho;
  out.col(0) = rho;
  for (int s = 0; s < steps; ++s) {
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
