#pragma once

// Velocity-space discretization on V = [-1, 1] with the measure dmu = dv/2.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>

#include "apbl/error.hpp"

namespace apbl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Quadrature nodes and mu-weights on (-1, 1) together with the sampled
/// equilibrium. Immutable after construction.
struct VelocityGrid {
  Vec nodes;
  Vec mu_weights;
  Vec equilibrium;

  [[nodiscard]] std::size_t size() const noexcept {
    return static_cast<std::size_t>(nodes.size());
  }
  /// Sum of w_k E_k, the normalization of the bracket.
  [[nodiscard]] double equilibrium_mass() const { return mu_weights.dot(equilibrium); }
  /// Largest |v_k|.
  [[nodiscard]] double max_speed() const { return nodes.cwiseAbs().maxCoeff(); }
};

namespace detail {

// Gauss-Legendre rule on [-1, 1]: Boost supplies the nonnegative roots of
// P_n in increasing order; weights are 2/((1-x^2) P_n'(x)^2).
inline void gauss_legendre(int n, Vec& x, Vec& w) {
  x.resize(n);
  w.resize(n);
  const std::vector<double> roots = boost::math::legendre_p_zeros<double>(n);
  const int h = n / 2;
  for (std::size_t j = 0; j < roots.size(); ++j) {
    const double z = roots[j];
    const double dp = boost::math::legendre_p_prime(n, z);
    const double wz = 2.0 / ((1.0 - z * z) * dp * dp);
    // For odd n, roots[0] = 0 lands on the center index h.
    const int hi = h + static_cast<int>(j);
    const int lo = n - 1 - hi;
    x[hi] = z;
    x[lo] = -z;
    w[hi] = w[lo] = wz;
  }
}

inline void check_even(int m) {
  if (m < 2 || m % 2 != 0) {
    throw Error("velocity grid needs an even node count >= 2, got " + std::to_string(m));
  }
}

}  // namespace detail

/// Full-range Gauss-Legendre grid, weights scaled to integrate dmu = dv/2.
/// Exact for polynomials of degree <= 2M-1 over V.
inline VelocityGrid gauss_grid(int m) {
  detail::check_even(m);
  VelocityGrid g;
  detail::gauss_legendre(m, g.nodes, g.mu_weights);
  g.mu_weights *= 0.5;
  g.equilibrium = Vec::Ones(m);
  return g;
}

/// Double Gauss grid: an M/2-point Gauss-Legendre rule on each of [-1, 0] and
/// [0, 1]. Symmetric, no node at 0, and half-range integrals over v>0 or v<0
/// are exact for polynomials of degree <= M-1.
inline VelocityGrid half_range_gauss_grid(int m) {
  detail::check_even(m);
  Vec x;
  Vec w;
  detail::gauss_legendre(m / 2, x, w);
  VelocityGrid g;
  g.nodes.resize(m);
  g.mu_weights.resize(m);
  const int h = m / 2;
  for (int i = 0; i < h; ++i) {
    const double s = 0.5 * (x[i] + 1.0);  // node on (0, 1)
    const double ws = 0.5 * w[i];         // dv weight on (0, 1)
    g.nodes[h + i] = s;
    g.nodes[h - 1 - i] = -s;
    g.mu_weights[h + i] = 0.5 * ws;
    g.mu_weights[h - 1 - i] = 0.5 * ws;
  }
  g.equilibrium = Vec::Ones(m);
  return g;
}

enum class VelocityRule { gauss, half_range_gauss };

inline VelocityGrid make_velocity_grid(VelocityRule rule, int m) {
  return rule == VelocityRule::gauss ? gauss_grid(m) : half_range_gauss_grid(m);
}

/// omega(x, v) = (2x - 1) v - x (1 - x); omega(0, v) = -v and omega(1, v) = v.
inline double omega(double x, double v) noexcept { return (2.0 * x - 1.0) * v - x * (1.0 - x); }

/// Incoming set V-(x) = { v : omega(x, v) < 0 } as a node mask. Nodes where
/// omega vanishes belong to V+.
struct HalfRangeMask {
  std::vector<bool> minus;
  double location = 0.0;

  [[nodiscard]] std::size_t count_minus() const {
    std::size_t n = 0;
    for (bool b : minus) n += b ? 1 : 0;
    return n;
  }
  [[nodiscard]] std::size_t count_plus() const { return minus.size() - count_minus(); }
};

inline HalfRangeMask make_mask(const VelocityGrid& grid, double x) {
  HalfRangeMask m;
  m.location = x;
  m.minus.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    m.minus[k] = omega(x, grid.nodes[static_cast<Eigen::Index>(k)]) < 0.0;
  }
  return m;
}

namespace detail {
inline void check_shape(const Vec& h, const VelocityGrid& grid) {
  if (static_cast<std::size_t>(h.size()) != grid.size()) {
    throw Error("velocity vector has " + std::to_string(h.size()) + " entries, grid has " +
                std::to_string(grid.size()));
  }
}
}  // namespace detail

/// <h>_V = sum w h / sum w E.
inline double bracket_V(const Vec& h, const VelocityGrid& grid) {
  detail::check_shape(h, grid);
  return grid.mu_weights.dot(h) / grid.equilibrium_mass();
}

/// Mean of h over the masked nodes, normalized by the mass of E on them.
inline double bracket_half(const Vec& h, const VelocityGrid& grid, const HalfRangeMask& mask) {
  detail::check_shape(h, grid);
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index k = 0; k < h.size(); ++k) {
    if (!mask.minus[static_cast<std::size_t>(k)]) continue;
    num += grid.mu_weights[k] * h[k];
    den += grid.mu_weights[k] * grid.equilibrium[k];
  }
  if (den <= 0.0) {
    throw Error("empty incoming set V-(x) at x = " + std::to_string(mask.location));
  }
  return num / den;
}

/// Pi_{V-} h = <h>_{V-} E.
inline Vec project_minus(const Vec& h, const VelocityGrid& grid, const HalfRangeMask& mask) {
  return bracket_half(h, grid, mask) * grid.equilibrium;
}

/// (I - Pi_{V-}) h.
inline Vec project_out(const Vec& h, const VelocityGrid& grid, const HalfRangeMask& mask) {
  return h - project_minus(h, grid, mask);
}

/// Matrix of Pi_{V-}: E m^T with m_k = w_k 1[k in V-] / sum_{V-} w E.
inline Mat projector_matrix(const VelocityGrid& grid, const HalfRangeMask& mask) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Vec row = Vec::Zero(m);
  double den = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!mask.minus[static_cast<std::size_t>(k)]) continue;
    row[k] = grid.mu_weights[k];
    den += grid.mu_weights[k] * grid.equilibrium[k];
  }
  if (den <= 0.0) {
    throw Error("empty incoming set V-(x) at x = " + std::to_string(mask.location));
  }
  return grid.equilibrium * (row / den).transpose();
}

}  // namespace apbl
