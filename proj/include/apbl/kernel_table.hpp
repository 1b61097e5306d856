#pragma once

#include <optional>
#include <string>

#include "apbl/vquad.hpp"

namespace apbl {

/// Coefficients of the closed-form kernel K(v) = a v^2/p(v) + b v + c p(v) + d
/// together with the half-range integrals they are built from.
struct KernelCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  double alpha = 0.0;  // int_0^1 p
  double beta = 0.0;   // int_0^1 v/p (reported, not used by a..d)
  double gamma = 0.0;  // int_0^1 v^2/p
  double delta = 0.0;  // int_0^1 v^3/p^2
  double kappa = 0.0;  // gamma / alpha
  double v3_over_p = 0.0;  // int_0^1 v^3/p
  double v_p = 0.0;        // int_0^1 v p

  /// int_0^1 v K(v) dv, the boundary value for inflow f = v.
  [[nodiscard]] double first_moment() const { return a * v3_over_p + b / 3.0 + c * v_p + d / 2.0; }
};

enum class KernelKind { K0, K1, K2, K3, Ksigma, Ksigma_app, K_L_naive, K_L_lme };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::K0: return "K0";
    case KernelKind::K1: return "K1";
    case KernelKind::K2: return "K2";
    case KernelKind::K3: return "K3";
    case KernelKind::Ksigma: return "Ksigma";
    case KernelKind::Ksigma_app: return "Ksigma_app";
    case KernelKind::K_L_naive: return "K_L_naive";
    case KernelKind::K_L_lme: return "K_L_lme";
  }
  return "?";
}

/// Boundary kernel sampled on incoming speeds in (0, 1). dv_weights integrate
/// against plain dv on (0, 1), so the boundary value is sum K_k f_k dv_k.
struct KernelTable {
  KernelKind kind = KernelKind::K0;
  Vec nodes;
  Vec dv_weights;
  Vec samples;
  std::optional<KernelCoefficients> coefficients;

  /// int_0^1 K(v) dv.
  [[nodiscard]] double integral() const { return dv_weights.dot(samples); }
};

}  // namespace apbl
