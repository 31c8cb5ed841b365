#pragma once

#include <cstdint>
#include <vector>

#include "decolab/qcore.hpp"

// Stratonovich stochastic Schroedinger equation (hbar = 1)
//
//   d|Psi> = -i H |Psi> dt - i sum_j L_j |Psi> o dW_j,   <dW_j^2> = gamma_j dt
//
// integrated with the Heun predictor-corrector scheme (same Wiener
// increment in both stages), plus the deterministic first-moment equation
//
//   d|Psi~>/dt = -i H |Psi~> - (1/2) sum_j gamma_j L_j^2 |Psi~>.
//
// Trajectory simulation requires gamma_j >= 0; backward channels
// (gamma_j < 0) are only supported by the averaged moment equations, since
// forward trajectories cannot realise <dW^2> = -dt.

namespace decolab::trajectories {

struct SSEConfig {
  ComplexMatrix hamiltonian;
  std::vector<DephasingChannel> channels;
  ComplexVector initial_state;
  double dt = 1e-3;
  double t_end = 1.0;
  int n_traj = 1;
  std::uint64_t seed = 0;
  int store_stride = 1;  // record every k-th step (t = 0 and t_end always kept)

  Eigen::Index dim() const { return hamiltonian.rows(); }
  /// dt * max_j |gamma_j| * ||L_j||_2^2; keep well below 0.1.
  double stability_parameter() const;
  bool stability_warning() const { return stability_parameter() > 0.1; }
  /// Throws on hard errors; requires gamma_j >= 0 (trajectory mode).
  void validate(bool require_forward = true) const;

  /// 1e-3 of the characteristic time 1 / max(||H||, gamma ||L||^2).
  static double default_dt(const ComplexMatrix& hamiltonian,
                           const std::vector<DephasingChannel>& channels);
};

struct StatePath {
  std::vector<double> times;
  std::vector<ComplexVector> states;
};

/// One realisation of |Psi(t)>, reproducible from (cfg.seed, traj_index).
StatePath integrate_sse_trajectory(const SSEConfig& cfg, std::uint64_t traj_index);

struct EnsembleResult {
  std::vector<double> times;
  std::vector<ComplexVector> mean_state;     // <|Psi~>>
  std::vector<ComplexMatrix> mean_density;   // rho~ = avg |Psi><Psi| (raw, not renormalised)
  std::vector<RealMatrix> se_real;           // standard error of Re rho~ entries
  std::vector<RealMatrix> se_imag;           // and of Im rho~ entries
  int n_traj = 0;
  bool stability_warning = false;

  static double relaxed_positivity_tolerance(int n_traj) {
    return 1e-3 / std::sqrt(static_cast<double>(n_traj)) + 1e-8;
  }
};

/// Averages n_traj independent trajectories. Work is split into fixed
/// chunks reduced in chunk order, so the result is bit-identical for any
/// thread count; DECOLAB_THREADS caps the worker count.
EnsembleResult run_ensemble(const SSEConfig& cfg);

/// RK4 integration of the first-moment equation; accepts gamma of any sign.
StatePath integrate_averaged_psi(const SSEConfig& cfg);

/// CSV rows: time, then Re/Im of each mean-density entry requested,
/// with the matching standard errors.
std::string ensemble_to_csv(const EnsembleResult& ens,
                            const std::vector<std::pair<int, int>>& entries);

}  // namespace decolab::trajectories
