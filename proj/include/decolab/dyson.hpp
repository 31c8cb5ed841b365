#pragma once

#include <vector>

#include "decolab/lindblad.hpp"
#include "decolab/qcore.hpp"

// Minimal two-channel model: a two-level system with diagonal dephasing
// and a weak off-diagonal coupling g sigma_x, treated by a perturbative
// hierarchy of superoperator (Dyson-type) corrections
//
//   rho(t) = rho^(0) + g rho^(1) + g^2 rho^(2) + ...
//
// The unperturbed generator damps and rotates the coherence while leaving
// populations fixed; the leading population transfer appears at order g^2
// with the long-time rate 2 g^2 Phi_gamma, Phi_gamma = Gamma/(Gamma^2 +
// domega^2). Phi_gamma peaks at Gamma = |domega| and is suppressed both
// for Gamma -> 0 and for strong dephasing (the quantum Zeno turnover).

namespace decolab::dyson {

struct TwoLevelModel {
  double e1 = 0.0;     // energy of |1>
  double e2 = 0.0;     // energy of |2>
  double a1 = 0.0;     // dephasing amplitude on |1>
  double a2 = 0.0;     // dephasing amplitude on |2>
  double gamma = 0.0;  // dephasing intensity, >= 0
  double g = 0.0;      // off-diagonal coupling

  double detuning() const { return e2 - e1; }                                  // domega
  double dephasing_rate() const { return 0.5 * gamma * (a1 - a2) * (a1 - a2); }  // Gamma
  void validate() const;

  /// Full generator H0 + g*H1 with the single diagonal channel, for
  /// cross-checks against lindblad::propagate.
  lindblad::DephasingGenerator full_generator() const;
  /// Same with g = 0 (the unperturbed part only).
  lindblad::DephasingGenerator unperturbed_generator() const;
};

/// exp(tau L0) applied to rho: populations unchanged, rho12 multiplied by
/// exp(-(Gamma - i domega) tau), rho21 by the conjugate factor.
ComplexMatrix unperturbed_propagator(const TwoLevelModel& m, double tau, const ComplexMatrix& rho);

struct FirstOrderCoherence {
  Complex value;
  bool degenerate_limit = false;  // (Gamma, domega) = (0, 0): value = i t
};

/// Closed form rho12^(1)(t) = i (1 - exp((-Gamma + i domega) t)) / (Gamma - i domega).
FirstOrderCoherence first_order_coherence(const TwoLevelModel& m, double t);

/// Phi(t) = integral_0^t exp(-Gamma u) cos(domega u) du, closed form.
double transition_integral(const TwoLevelModel& m, double t);

/// d rho22^(2)/dt = 2 Phi(t).
double second_order_population_rate(const TwoLevelModel& m, double t);

/// Trapezoid evaluation of the same integral; the oracle the closed form
/// is gated against.
double transition_integral_quadrature(const TwoLevelModel& m, double t, int n_panels);

/// Phi_gamma = Gamma / (Gamma^2 + domega^2); throws on (0, 0).
/// Effective coupling squared is g^2 * Phi_gamma.
double decoherence_gain(const TwoLevelModel& m);

struct DysonTerms {
  std::vector<double> times;
  std::vector<Eigen::Matrix2cd> order0;
  std::vector<Eigen::Matrix2cd> order1;
  std::vector<Eigen::Matrix2cd> order2;
};

/// RK4 integration of the block-triangular hierarchy
/// d rho^(0)/dt = L0 rho^(0);  d rho^(i+1)/dt = L0 rho^(i+1) + L1 rho^(i).
DysonTerms integrate_hierarchy(const TwoLevelModel& m, double t_end, double dt,
                               int store_stride = 1);

struct DysonComparison {
  double max_population_deviation = 0.0;  // |rho22_exact - g^2 rho22^(2)| over the path
  double max_series_residual = 0.0;       // |rho_exact - (rho0 + g rho1 + g^2 rho2)|, max entry
  double fitted_slope = 0.0;              // d rho22/dt of the exact solution, late window
  double predicted_slope = 0.0;           // 2 g^2 Phi_gamma
  double slope_relative_error = 0.0;
  double validity_window = 0.0;           // t where 2 g^2 Phi_gamma t reaches 0.1
};

/// Exact RK4 propagation vs the g^2 hierarchy on [0, t_end]; the slope is
/// measured on the second half of the window.
DysonComparison dyson_vs_exact(const TwoLevelModel& m, double t_end, double dt = 1e-3);

struct GainScanRow {
  double dephasing_rate;
  double detuning;
  double gain;         // Phi_gamma
  double exact_slope;  // measured on the full model at the scan coupling
};

/// Phi_gamma surface over a (Gamma, domega) grid, with the measured exact
/// slope alongside; emitted by the CLI as CSV.
std::vector<GainScanRow> gain_scan(const std::vector<double>& rates,
                                   const std::vector<double>& detunings, double g = 1e-2);

}  // namespace decolab::dyson
