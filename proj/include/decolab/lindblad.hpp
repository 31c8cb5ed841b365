#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "decolab/qcore.hpp"

// Deterministic propagation of the bi-directional dephasing master
// equation
//
//   d rho/dt = -i [H, rho] - (1/2) sum_j gamma_j [L_j, [L_j, rho]]
//
// (hbar = 1), with stochastic channels of either sign and bath channels of
// non-negative rate. Also houses the diagonal rate algebra
// Gamma_ki = (1/2) sum_j gamma_j (a_j^k - a_j^i)^2, the Markov-limit bath
// rate integrals and the energy-conservation criterion
// ([H, L_j] = 0 for all j iff Tr(H rho) is conserved, for gamma_j > 0).

namespace decolab::lindblad {

struct DephasingGenerator {
  ComplexMatrix hamiltonian;
  std::vector<DephasingChannel> channels;       // stochastic, any-sign gamma
  std::vector<DephasingChannel> bath_channels;  // gamma >= 0

  Eigen::Index dim() const { return hamiltonian.rows(); }
  void validate() const;

  /// Right-hand side of the master equation at hbar = 1.
  ComplexMatrix apply(const ComplexMatrix& rho) const;
};

struct DensityPath {
  std::vector<double> times;
  std::vector<ComplexMatrix> densities;
  // Negative-gamma runs may lose positivity; the integration halts once
  // min eig(rho) < positivity_floor and the flag is set. Never fatal.
  bool positivity_flagged = false;
  double min_eigenvalue_seen = std::numeric_limits<double>::infinity();

  const ComplexMatrix& final_density() const { return densities.back(); }
  double final_time() const { return times.back(); }
};

struct PropagateOptions {
  int store_stride = 1;           // record every k-th step (plus t=0 and t_end)
  double positivity_floor = -1e-3;
  bool check_positivity = true;   // only exercised when some gamma < 0
};

/// Fixed-step RK4. Trace and Hermiticity are preserved to O(1e-10) over
/// the tested horizons for any sign pattern of gamma.
DensityPath propagate(const DephasingGenerator& gen, const DensityMatrix& rho0, double t_end,
                      double dt, const PropagateOptions& opts = {});

struct RateMatrices {
  RealMatrix stochastic;  // Gamma
  RealMatrix bath;        // Gamma^B
  RealMatrix total;       // Gamma^tot = Gamma + Gamma^B
};

/// Rates for channels diagonal in the reference basis (off-diagonal defect
/// below diag_tol required, else throws). Symmetric, zero diagonal;
/// entries may be negative for gamma_j < 0.
RateMatrices diagonal_rates(const DephasingGenerator& gen, double diag_tol = 1e-10);

/// Extracts the real diagonal a_j^k of a channel operator, throwing if any
/// off-diagonal element exceeds diag_tol.
RealVector diagonal_amplitudes(const ComplexMatrix& op, double diag_tol = 1e-10);

/// Bath correlation C(tau) sampled on the uniform grid tau_k = k * dtau.
struct BathCorrelation {
  double dtau = 0.0;
  std::vector<Complex> samples;
};

struct BathRates {
  double gamma_bath = 0.0;  // 2 * integral_0^inf Re C
  double eta_bath = 0.0;    // 2 * integral_0^inf Im C (Lamb-shift strength)
  bool negative_gamma_warning = false;
};

/// Trapezoidal quadrature of the sampled correlator. Requires the tail to
/// have decayed: |C(tau_max)| < tail_fraction * |C(0)| (else throws).
BathRates bath_rates(const BathCorrelation& corr, double tail_fraction = 1e-6);

struct EnergyConservationReport {
  struct PerChannel {
    double gamma = 0.0;
    double commutator_norm = 0.0;  // ||[H, L_j]||_F
    bool commutes = false;
  };
  std::vector<PerChannel> channels;
  double adjoint_residual = 0.0;           // ||sum_j gamma_j [L_j,[L_j,H]]||_F
  double adjoint_residual_positive = 0.0;  // same sum over gamma_j > 0 only
  double adjoint_residual_negative = 0.0;  // and over gamma_j < 0 only
  // True when the full adjoint residual vanishes but some [H, L_j] != 0;
  // with mixed-sign gamma the criterion must be enforced separately per
  // sign subset, and cancellation across subsets is not sufficient.
  bool sign_subset_caveat = false;
  double max_energy_drift = 0.0;  // max_t |Tr(H rho(t)) - Tr(H rho(0))|
  bool all_commute(double tol = 1e-9) const;
};

EnergyConservationReport energy_conservation_check(const DephasingGenerator& gen,
                                                   const DensityMatrix& rho0, double t_end,
                                                   double dt);

// Scalar observables used by tests and the CSV export.
double von_neumann_entropy(const ComplexMatrix& rho);
double purity(const ComplexMatrix& rho);
double energy_expectation(const ComplexMatrix& hamiltonian, const ComplexMatrix& rho);

/// CSV rows: time, Re/Im of the selected entries, entropy, purity, energy.
std::string path_to_csv(const DensityPath& path, const ComplexMatrix& hamiltonian,
                        const std::vector<std::pair<int, int>>& entries);

}  // namespace decolab::lindblad
