#pragma once

// Linear collision operator Lf(v) = 1/2 int sigma(v,w) (f(w) - f(v)) dw on the
// velocity grid, its pseudo-inverse, and the projected operator
// Ltilde = (I - Pi_{V-}) L (I - Pi_{V-}) with the two linear solves the
// schemes need.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "apbl/error.hpp"
#include "apbl/vquad.hpp"

namespace apbl {

/// Symmetric nonnegative cross section sigma(v, w).
class CrossSection {
 public:
  enum class Kind { constant, multiplicative, pairwise };
  /// Named multiplicative families, whose half-range moments are known in
  /// closed form.
  enum class Family { none, abs_pow, one_minus_v2_pow };

  /// sigma = c.
  static CrossSection constant(double c = 1.0) {
    CrossSection s;
    s.kind_ = Kind::constant;
    s.value_ = c;
    s.label_ = "constant";
    s.p_ = [c](double) { return std::sqrt(c); };
    return s;
  }

  /// sigma = p(v) p(w) with p even and positive.
  static CrossSection multiplicative(std::string label, std::function<double(double)> p) {
    CrossSection s;
    s.kind_ = Kind::multiplicative;
    s.label_ = std::move(label);
    s.p_ = std::move(p);
    return s;
  }

  /// p(v) = |v|^q.
  static CrossSection abs_pow(double q) {
    std::ostringstream os;
    os << "abs_pow(" << q << ")";
    auto s = multiplicative(os.str(), [q](double v) { return std::pow(std::abs(v), q); });
    s.family_ = Family::abs_pow;
    s.exponent_ = q;
    return s;
  }

  /// p(v) = (1 - v^2)^q.
  static CrossSection one_minus_v2_pow(double q) {
    std::ostringstream os;
    os << "one_minus_v2_pow(" << q << ")";
    auto s = multiplicative(os.str(), [q](double v) { return std::pow(1.0 - v * v, q); });
    s.family_ = Family::one_minus_v2_pow;
    s.exponent_ = q;
    return s;
  }

  /// General symmetric phi(v, w). The diagonal v = w is never sampled.
  static CrossSection pairwise(std::string label, std::function<double(double, double)> phi) {
    CrossSection s;
    s.kind_ = Kind::pairwise;
    s.label_ = std::move(label);
    s.phi_ = std::move(phi);
    return s;
  }

  /// sigma = |v - w|^q (q may be negative: integrable singularity at v = w).
  static CrossSection abs_diff_pow(double q) {
    std::ostringstream os;
    os << "abs_diff_pow(" << q << ")";
    return pairwise(os.str(), [q](double v, double w) { return std::pow(std::abs(v - w), q); });
  }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }
  [[nodiscard]] bool is_multiplicative() const noexcept { return kind_ != Kind::pairwise; }
  [[nodiscard]] Family family() const noexcept { return family_; }
  [[nodiscard]] double exponent() const noexcept { return exponent_; }

  /// Factor p of a constant or multiplicative cross section.
  [[nodiscard]] double p(double v) const {
    if (kind_ == Kind::pairwise) throw Error("cross section '" + label_ + "' is not multiplicative");
    return p_(v);
  }

  [[nodiscard]] double operator()(double v, double w) const {
    switch (kind_) {
      case Kind::constant:
        return value_;
      case Kind::multiplicative:
        return p_(v) * p_(w);
      case Kind::pairwise:
        return phi_(v, w);
    }
    return 0.0;
  }

 private:
  CrossSection() = default;

  Kind kind_ = Kind::constant;
  Family family_ = Family::none;
  double exponent_ = 0.0;
  double value_ = 1.0;
  std::string label_;
  std::function<double(double)> p_;
  std::function<double(double, double)> phi_;
};

/// Dense action of L on node vectors with the diffusion coefficient
/// kappa = -<v L^{-1}(v E)>_V. Immutable after assembly.
class CollisionOperator {
 public:
  CollisionOperator(Mat matrix, VelocityGrid grid) : matrix_(std::move(matrix)), grid_(std::move(grid)) {
    const auto m = matrix_.rows();
    Mat bordered = Mat::Zero(m + 1, m + 1);
    bordered.topLeftCorner(m, m) = matrix_;
    bordered.topRightCorner(m, 1) = grid_.equilibrium;
    bordered.bottomLeftCorner(1, m) = grid_.mu_weights.transpose();
    bordered_ = Eigen::PartialPivLU<Mat>(bordered);
    if (!(bordered_.rcond() > 1e-14)) {
      throw Error("collision operator: null space is not spanned by the equilibrium");
    }
    const Vec ve = grid_.nodes.cwiseProduct(grid_.equilibrium);
    kappa_ = -bracket_V(grid_.nodes.cwiseProduct(pseudo_inverse(ve)), grid_);
    if (!(kappa_ > 0.0)) {
      std::ostringstream os;
      os << "diffusion coefficient is not positive (kappa = " << kappa_ << ")";
      throw Error(os.str());
    }
  }

  [[nodiscard]] const Mat& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const VelocityGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] double kappa() const noexcept { return kappa_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return matrix_.rows(); }

  [[nodiscard]] Vec apply(const Vec& f) const { return matrix_ * f; }

  /// Unique u with L u = h and <u>_V = 0. Requires <h>_V = 0 (relative 1e-10).
  [[nodiscard]] Vec pseudo_inverse(const Vec& h) const {
    detail::check_shape(h, grid_);
    const double scale = h.cwiseAbs().maxCoeff();
    const double mean = bracket_V(h, grid_);
    if (std::abs(mean) > 1e-10 * scale) {
      std::ostringstream os;
      os << "pseudo-inverse: right-hand side has nonzero mean " << mean;
      throw Error(os.str());
    }
    const auto m = matrix_.rows();
    Vec rhs = Vec::Zero(m + 1);
    rhs.head(m) = h;
    const Vec sol = bordered_.solve(rhs);
    return sol.head(m);
  }

 private:
  Mat matrix_;
  VelocityGrid grid_;
  Eigen::PartialPivLU<Mat> bordered_;
  double kappa_ = 0.0;
};

/// (Lf)_k = sum_{j != k} w_j sigma(v_k, v_j) (E_k f_j - E_j f_k).
inline CollisionOperator assemble_L(const CrossSection& sigma, const VelocityGrid& grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  Mat s(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < m; ++j) {
      s(k, j) = (k == j) ? 0.0 : sigma(grid.nodes[k], grid.nodes[j]);
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = k + 1; j < m; ++j) {
      const double a = s(k, j);
      const double b = s(j, k);
      if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
        throw Error("cross section '" + sigma.label() + "' has a negative or non-finite sample");
      }
      if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) {
        throw Error("cross section '" + sigma.label() + "' is not symmetric");
      }
    }
  }
  const Vec& w = grid.mu_weights;
  const Vec& e = grid.equilibrium;
  Mat l = Mat::Zero(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == k) continue;
      l(k, j) = w[j] * s(k, j) * e[k];
      diag -= w[j] * s(k, j) * e[j];
    }
    l(k, k) = diag;
  }
  return CollisionOperator(std::move(l), grid);
}

inline Vec pseudo_inverse_apply(const CollisionOperator& op, const Vec& h) { return op.pseudo_inverse(h); }

inline double diffusion_kappa(const CollisionOperator& op) { return op.kappa(); }

/// D^{1/2} L D^{-1/2} with D = diag(w / E); symmetric iff L is self-adjoint in
/// L^2(E^{-1} dmu).
inline Mat mu_symmetrized(const Mat& l, const VelocityGrid& grid) {
  const Vec d = grid.mu_weights.cwiseQuotient(grid.equilibrium).cwiseSqrt();
  return d.asDiagonal() * l * d.cwiseInverse().asDiagonal();
}

/// Ltilde = (I - Pi_{V-}) L (I - Pi_{V-}).
inline Mat assemble_Ltilde(const CollisionOperator& op, const HalfRangeMask& mask) {
  const auto m = op.size();
  const Mat q = Mat::Identity(m, m) - projector_matrix(op.grid(), mask);
  return q * op.matrix() * q;
}

namespace detail {

inline Eigen::PartialPivLU<Mat> factor_checked(const Mat& a, const char* what, double alpha = -1.0) {
  Eigen::PartialPivLU<Mat> lu(a);
  if (!(lu.rcond() > 1e-14)) {
    std::ostringstream os;
    os << what << ": matrix is singular (rcond = " << lu.rcond() << ")";
    // E spans the kernel of Ltilde, so alpha is the smallest eigenvalue.
    if (alpha > 0.0) os << "; alpha = eps^2/dt = " << alpha << " is too small, increase eps or dt";
    throw Error(os.str());
  }
  return lu;
}

inline std::vector<Eigen::Index> plus_indices(const HalfRangeMask& mask) {
  std::vector<Eigen::Index> idx;
  for (std::size_t k = 0; k < mask.minus.size(); ++k) {
    if (!mask.minus[k]) idx.push_back(static_cast<Eigen::Index>(k));
  }
  return idx;
}

inline Mat restrict_plus(const Mat& a, const std::vector<Eigen::Index>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Mat r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = a(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return r;
}

inline Mat regularized(double alpha, const Mat& ltilde) {
  return alpha * Mat::Identity(ltilde.rows(), ltilde.cols()) - ltilde;
}

}  // namespace detail

/// Solves (alpha I - Ltilde) g = h by dense LU.
inline Vec solve_regularized(double alpha, const Mat& ltilde, const Vec& h) {
  if (!(alpha > 0.0)) throw Error("solve_regularized: alpha must be positive");
  return detail::factor_checked(detail::regularized(alpha, ltilde), "solve_regularized", alpha).solve(h);
}

/// Solves 1_{V+} (alpha I - Ltilde) 1_{V+} g = rhs on the V+ block. rhs must
/// vanish on V-; the result vanishes there.
inline Vec solve_halfrange(double alpha, const Mat& ltilde, const HalfRangeMask& mask, const Vec& rhs) {
  if (!(alpha >= 0.0)) throw Error("solve_halfrange: alpha must be nonnegative");
  const auto idx = detail::plus_indices(mask);
  for (std::size_t k = 0; k < mask.minus.size(); ++k) {
    if (mask.minus[k] && rhs[static_cast<Eigen::Index>(k)] != 0.0) {
      throw Error("solve_halfrange: right-hand side is not supported on V+");
    }
  }
  const Mat a = detail::restrict_plus(detail::regularized(alpha, ltilde), idx);
  const auto lu = detail::factor_checked(a, "solve_halfrange");
  Vec r(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) r[static_cast<Eigen::Index>(i)] = rhs[idx[i]];
  const Vec s = lu.solve(r);
  Vec g = Vec::Zero(rhs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) g[idx[i]] = s[static_cast<Eigen::Index>(i)];
  return g;
}

/// Ltilde at one spatial location with factorizations cached per alpha.
/// Not safe for concurrent mutation; each run owns its own instances.
class ProjectedOperator {
 public:
  ProjectedOperator(const CollisionOperator& op, HalfRangeMask mask)
      : mask_(std::move(mask)), grid_(op.grid()) {
    const auto m = op.size();
    projector_ = projector_matrix(op.grid(), mask_);
    complement_ = Mat::Identity(m, m) - projector_;
    ltilde_ = complement_ * op.matrix() * complement_;
    plus_ = detail::plus_indices(mask_);
  }

  [[nodiscard]] const HalfRangeMask& mask() const noexcept { return mask_; }
  [[nodiscard]] const Mat& ltilde() const noexcept { return ltilde_; }
  [[nodiscard]] const Mat& projector() const noexcept { return projector_; }
  [[nodiscard]] const VelocityGrid& grid() const noexcept { return grid_; }

  /// (I - Pi_{V-}) h.
  [[nodiscard]] Vec project_out(const Vec& h) const { return complement_ * h; }
  /// <h>_{V-}.
  [[nodiscard]] double bracket_minus(const Vec& h) const { return bracket_half(h, grid_, mask_); }

  [[nodiscard]] Vec solve_regularized(double alpha, const Vec& h) {
    auto it = regularized_.find(alpha);
    if (it == regularized_.end()) {
      if (!(alpha > 0.0)) throw Error("solve_regularized: alpha must be positive");
      it = regularized_.emplace(alpha, detail::factor_checked(detail::regularized(alpha, ltilde_), "solve_regularized", alpha)).first;
    }
    return it->second.solve(h);
  }

  /// V+ block solve; entries of rhs on V- are ignored.
  [[nodiscard]] Vec solve_halfrange(double alpha, const Vec& rhs) {
    auto it = halfrange_.find(alpha);
    if (it == halfrange_.end()) {
      if (!(alpha >= 0.0)) throw Error("solve_halfrange: alpha must be nonnegative");
      const Mat a = detail::restrict_plus(detail::regularized(alpha, ltilde_), plus_);
      it = halfrange_.emplace(alpha, detail::factor_checked(a, "solve_halfrange")).first;
    }
    Vec r(static_cast<Eigen::Index>(plus_.size()));
    for (std::size_t i = 0; i < plus_.size(); ++i) r[static_cast<Eigen::Index>(i)] = rhs[plus_[i]];
    const Vec s = it->second.solve(r);
    Vec g = Vec::Zero(rhs.size());
    for (std::size_t i = 0; i < plus_.size(); ++i) g[plus_[i]] = s[static_cast<Eigen::Index>(i)];
    return g;
  }

  /// Zeroes the V+ entries.
  [[nodiscard]] Vec restrict_minus(const Vec& h) const {
    Vec r = h;
    for (std::size_t k = 0; k < mask_.minus.size(); ++k) {
      if (!mask_.minus[k]) r[static_cast<Eigen::Index>(k)] = 0.0;
    }
    return r;
  }
  /// Zeroes the V- entries.
  [[nodiscard]] Vec restrict_plus(const Vec& h) const {
    Vec r = h;
    for (std::size_t k = 0; k < mask_.minus.size(); ++k) {
      if (mask_.minus[k]) r[static_cast<Eigen::Index>(k)] = 0.0;
    }
    return r;
  }

 private:
  HalfRangeMask mask_;
  VelocityGrid grid_;
  Mat projector_;
  Mat complement_;
  Mat ltilde_;
  std::vector<Eigen::Index> plus_;
  std::map<double, Eigen::PartialPivLU<Mat>> regularized_;
  std::map<double, Eigen::PartialPivLU<Mat>> halfrange_;
};

}  // namespace apbl
