#pragma once

// Pieces shared by the two micro-macro schemes: per-location projected
// operators, the semi-implicit upwind micro update and the macro update.

#include <cmath>
#include <sstream>
#include <vector>

#include "apbl/collision.hpp"
#include "apbl/error.hpp"
#include "apbl/grid_state.hpp"

namespace apbl {

/// Everything a scheme step needs besides the state. Holds one projected
/// operator per midpoint plus the two boundary ones; their factorization
/// caches make repeated steps cost O(M^2) per location.
class SchemeContext {
 public:
  SchemeContext(CollisionOperator op, SpatialGrid grid, BoundaryData boundary)
      : op_(std::move(op)), grid_(grid), boundary_(std::move(boundary)) {
    const VelocityGrid& vg = op_.grid();
    velocity_ = vg.nodes;
    v_e_ = vg.nodes.cwiseProduct(vg.equilibrium);
    mid_.reserve(static_cast<std::size_t>(grid_.midpoint_count()));
    for (int i = 0; i < grid_.midpoint_count(); ++i) {
      mid_.emplace_back(op_, make_mask(vg, grid_.midpoint(i)));
    }
    left_.emplace_back(op_, make_mask(vg, 0.0));
    right_.emplace_back(op_, make_mask(vg, 1.0));
  }

  [[nodiscard]] const CollisionOperator& op() const noexcept { return op_; }
  [[nodiscard]] const VelocityGrid& vgrid() const noexcept { return op_.grid(); }
  [[nodiscard]] const SpatialGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const BoundaryData& boundary() const noexcept { return boundary_; }
  [[nodiscard]] const Vec& velocity() const noexcept { return velocity_; }
  /// v E
  [[nodiscard]] const Vec& v_e() const noexcept { return v_e_; }

  ProjectedOperator& mid(int i) { return mid_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const ProjectedOperator& mid(int i) const { return mid_[static_cast<std::size_t>(i)]; }
  ProjectedOperator& left() { return left_.front(); }
  ProjectedOperator& right() { return right_.front(); }

  /// Incoming part of g at x = 0: f_l - rhobar_0 E on {v > 0}, zero elsewhere.
  [[nodiscard]] Vec inflow_left() const {
    return left_.front().restrict_minus(boundary_.f_left - boundary_.rhobar_left * vgrid().equilibrium);
  }
  [[nodiscard]] Vec inflow_right() const {
    return right_.front().restrict_minus(boundary_.f_right - boundary_.rhobar_right * vgrid().equilibrium);
  }

  [[nodiscard]] double bracket(const Vec& h) const { return bracket_V(h, vgrid()); }

 private:
  CollisionOperator op_;
  SpatialGrid grid_;
  BoundaryData boundary_;
  Vec velocity_;
  Vec v_e_;
  std::vector<ProjectedOperator> mid_;
  std::vector<ProjectedOperator> left_;
  std::vector<ProjectedOperator> right_;
};

/// Time step linked to the space step: dt = (dx^2/2 + eps dx) / 2.
inline double default_time_step(double dx, double epsilon) { return 0.5 * (0.5 * dx * dx + epsilon * dx); }

/// Stability bound dt <= C (dx^2 + eps dx) of the micro-macro schemes, C = 1.
inline void check_micro_macro_cfl(double dt, double dx, double epsilon, const char* scheme, Diagnostics* diag) {
  const double bound = dx * dx + epsilon * dx;
  if (dt > bound && diag != nullptr) {
    std::ostringstream os;
    os << scheme << ": dt = " << dt << " exceeds the stability bound dx^2 + eps dx = " << bound;
    diag->warn(os.str());
  }
}

namespace detail {

// v+ (c - l)/dx + v- (r - c)/dx node by node. A NaN neighbour on the side
// that upwinding does not select is never read.
inline Vec upwind_difference(const Vec& v, const Vec& l, const Vec& c, const Vec& r, double dx) {
  Vec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v[k] > 0.0) {
      out[k] = v[k] * (c[k] - l[k]) / dx;
    } else if (v[k] < 0.0) {
      out[k] = v[k] * (r[k] - c[k]) / dx;
    } else {
      out[k] = 0.0;
    }
  }
  return out;
}

// Semi-implicit micro update at midpoint i:
//   (eps^2/dt - Ltilde) g^{n+1} = eps^2/dt g^n - eps (I - Pi_{V-}) (transport + v E drho_bar)
inline Vec micro_update(ProjectedOperator& po, double alpha, double epsilon, const Vec& g_old, const Vec& transport,
                        const Vec& v_e, double drhobar_dx) {
  const Vec rhs = alpha * g_old - epsilon * po.project_out(transport + v_e * drhobar_dx);
  return po.solve_regularized(alpha, rhs);
}

// rho_i^{n+1} = rho_i^n - dt/(eps dx) <v (g_{i+1/2} - g_{i-1/2})>_V and
// rhobar_i = rho_i - <(g_{i+1/2} + g_{i-1/2})/2>_V for i = 1..N.
inline void macro_update(const SchemeContext& ctx, const MMState& old, MMState& next, double dt) {
  const double dx = ctx.grid().dx();
  const int n = ctx.grid().interior;
  const Vec& v = ctx.velocity();
  for (int i = 1; i <= n; ++i) {
    const Vec right = next.g_mid.col(i);
    const Vec left = next.g_mid.col(i - 1);
    const double flux = ctx.bracket(v.cwiseProduct(right - left));
    next.rho[i] = old.rho[i] - dt / (old.epsilon * dx) * flux;
    next.rhobar[i] = next.rho[i] - 0.5 * ctx.bracket(right + left);
  }
}

}  // namespace detail

/// Largest |<g_{i+1/2}>_{V-(x_{i+1/2})}| over the midpoints.
inline double max_minus_mean(const MMState& s, const SchemeContext& ctx) {
  double worst = 0.0;
  for (int i = 0; i < ctx.grid().midpoint_count(); ++i) {
    worst = std::max(worst, std::abs(ctx.mid(i).bracket_minus(s.g_mid.col(i))));
  }
  return worst;
}

}  // namespace apbl
