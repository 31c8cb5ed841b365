#include "decolab/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace decolab::lindblad {

void DephasingGenerator::validate() const {
  if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() < 1) {
    throw std::invalid_argument("DephasingGenerator: Hamiltonian must be square");
  }
  if (!is_hermitian(hamiltonian)) {
    throw std::invalid_argument("DephasingGenerator: Hamiltonian is not Hermitian");
  }
  for (const auto& ch : channels) {
    ch.validate();
    if (ch.op.rows() != dim()) {
      throw std::invalid_argument("DephasingGenerator: channel dimension mismatch");
    }
  }
  for (const auto& ch : bath_channels) {
    ch.validate();
    if (ch.op.rows() != dim()) {
      throw std::invalid_argument("DephasingGenerator: bath channel dimension mismatch");
    }
    if (ch.gamma < 0.0) {
      throw std::invalid_argument("DephasingGenerator: bath channel rate must be >= 0");
    }
  }
}

ComplexMatrix DephasingGenerator::apply(const ComplexMatrix& rho) const {
  const Complex i_unit(0.0, 1.0);
  ComplexMatrix out = -i_unit * (hamiltonian * rho - rho * hamiltonian);
  for (const auto& ch : channels) {
    out.noalias() -= 0.5 * ch.gamma * double_commutator(ch.op, rho);
  }
  for (const auto& ch : bath_channels) {
    out.noalias() -= 0.5 * ch.gamma * double_commutator(ch.op, rho);
  }
  return out;
}

DensityPath propagate(const DephasingGenerator& gen, const DensityMatrix& rho0, double t_end,
                      double dt, const PropagateOptions& opts) {
  gen.validate();
  if (dt <= 0.0 || t_end < 0.0) {
    throw std::invalid_argument("propagate: need dt > 0 and t_end >= 0");
  }
  if (rho0.dim() != gen.dim()) {
    throw std::invalid_argument("propagate: state dimension mismatch");
  }

  bool has_negative = false;
  for (const auto& ch : gen.channels) has_negative |= ch.gamma < 0.0;

  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
  DensityPath path;
  path.times.reserve(n_steps / opts.store_stride + 2);
  path.densities.reserve(n_steps / opts.store_stride + 2);

  ComplexMatrix rho = rho0.matrix();
  path.times.push_back(0.0);
  path.densities.push_back(rho);
  path.min_eigenvalue_seen = check_density(rho).min_eigenvalue;

  for (std::size_t step = 0; step < n_steps; ++step) {
    const ComplexMatrix k1 = gen.apply(rho);
    const ComplexMatrix k2 = gen.apply(rho + 0.5 * dt * k1);
    const ComplexMatrix k3 = gen.apply(rho + 0.5 * dt * k2);
    const ComplexMatrix k4 = gen.apply(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t = dt * static_cast<double>(step + 1);
    const bool store = ((step + 1) % static_cast<std::size_t>(opts.store_stride) == 0) ||
                       step + 1 == n_steps;
    if (store) {
      path.times.push_back(t);
      path.densities.push_back(rho);
    }
    if (has_negative && opts.check_positivity) {
      const double min_eig = check_density(rho).min_eigenvalue;
      path.min_eigenvalue_seen = std::min(path.min_eigenvalue_seen, min_eig);
      if (min_eig < opts.positivity_floor) {
        path.positivity_flagged = true;
        if (!store) {
          path.times.push_back(t);
          path.densities.push_back(rho);
        }
        break;
      }
    }
  }
  return path;
}

RealVector diagonal_amplitudes(const ComplexMatrix& op, double diag_tol) {
  ComplexMatrix off = op;
  off.diagonal().setZero();
  const double defect = off.cwiseAbs().maxCoeff();
  if (defect > diag_tol) {
    throw std::invalid_argument("diagonal_amplitudes: operator is not diagonal (off-diagonal " +
                                std::to_string(defect) + ")");
  }
  return op.diagonal().real();
}

namespace {

RealMatrix rates_from(const std::vector<DephasingChannel>& channels, Eigen::Index dim,
                      double diag_tol) {
  RealMatrix rates = RealMatrix::Zero(dim, dim);
  for (const auto& ch : channels) {
    const RealVector a = diagonal_amplitudes(ch.op, diag_tol);
    for (Eigen::Index k = 0; k < dim; ++k) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double d = a(k) - a(i);
        rates(k, i) += 0.5 * ch.gamma * d * d;
      }
    }
  }
  return rates;
}

}  // namespace

RateMatrices diagonal_rates(const DephasingGenerator& gen, double diag_tol) {
  gen.validate();
  RateMatrices out;
  out.stochastic = rates_from(gen.channels, gen.dim(), diag_tol);
  out.bath = rates_from(gen.bath_channels, gen.dim(), diag_tol);
  out.total = out.stochastic + out.bath;
  return out;
}

BathRates bath_rates(const BathCorrelation& corr, double tail_fraction) {
  if (corr.samples.size() < 2 || corr.dtau <= 0.0) {
    throw std::invalid_argument("bath_rates: need >= 2 samples on a positive grid");
  }
  const double c0 = std::abs(corr.samples.front());
  const double tail = std::abs(corr.samples.back());
  if (c0 > 0.0 && tail > tail_fraction * c0) {
    throw std::invalid_argument("bath_rates: correlator has not decayed within the window (|C(end)|/|C(0)| = " +
                                std::to_string(tail / c0) + ")");
  }
  Complex integral(0.0, 0.0);
  for (std::size_t k = 0; k + 1 < corr.samples.size(); ++k) {
    integral += 0.5 * corr.dtau * (corr.samples[k] + corr.samples[k + 1]);
  }
  BathRates out;
  out.gamma_bath = 2.0 * integral.real();
  out.eta_bath = 2.0 * integral.imag();
  out.negative_gamma_warning = out.gamma_bath < 0.0;
  return out;
}

bool EnergyConservationReport::all_commute(double tol) const {
  for (const auto& ch : channels) {
    if (ch.commutator_norm >= tol) return false;
  }
  return true;
}

EnergyConservationReport energy_conservation_check(const DephasingGenerator& gen,
                                                   const DensityMatrix& rho0, double t_end,
                                                   double dt) {
  gen.validate();
  EnergyConservationReport rep;

  const Eigen::Index d = gen.dim();
  ComplexMatrix adjoint_sum = ComplexMatrix::Zero(d, d);
  ComplexMatrix adjoint_pos = ComplexMatrix::Zero(d, d);
  ComplexMatrix adjoint_neg = ComplexMatrix::Zero(d, d);
  auto account = [&](const DephasingChannel& ch) {
    EnergyConservationReport::PerChannel pc;
    pc.gamma = ch.gamma;
    pc.commutator_norm = commutator(gen.hamiltonian, ch.op).norm();
    pc.commutes = pc.commutator_norm < 1e-9;
    rep.channels.push_back(pc);
    const ComplexMatrix term = ch.gamma * double_commutator(ch.op, gen.hamiltonian);
    adjoint_sum += term;
    if (ch.gamma > 0.0) adjoint_pos += term;
    if (ch.gamma < 0.0) adjoint_neg += term;
  };
  for (const auto& ch : gen.channels) account(ch);
  for (const auto& ch : gen.bath_channels) account(ch);

  rep.adjoint_residual = adjoint_sum.norm();
  rep.adjoint_residual_positive = adjoint_pos.norm();
  rep.adjoint_residual_negative = adjoint_neg.norm();
  rep.sign_subset_caveat = rep.adjoint_residual < 1e-9 && !rep.all_commute();

  const DensityPath path = propagate(gen, rho0, t_end, dt, {.check_positivity = false});
  const double e0 = energy_expectation(gen.hamiltonian, path.densities.front());
  for (const auto& rho : path.densities) {
    rep.max_energy_drift =
        std::max(rep.max_energy_drift, std::abs(energy_expectation(gen.hamiltonian, rho) - e0));
  }
  return rep;
}

double von_neumann_entropy(const ComplexMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()),
                                                  Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-15) s -= p * std::log(p);
  }
  return s;
}

double purity(const ComplexMatrix& rho) { return (rho * rho).trace().real(); }

double energy_expectation(const ComplexMatrix& hamiltonian, const ComplexMatrix& rho) {
  return (hamiltonian * rho).trace().real();
}

std::string path_to_csv(const DensityPath& path, const ComplexMatrix& hamiltonian,
                        const std::vector<std::pair<int, int>>& entries) {
  std::ostringstream os;
  os.precision(12);
  os << "time";
  for (const auto& [i, j] : entries) {
    os << ",re_rho" << i << j << ",im_rho" << i << j;
  }
  os << ",entropy,purity,energy\n";
  for (std::size_t t = 0; t < path.times.size(); ++t) {
    const ComplexMatrix& rho = path.densities[t];
    os << path.times[t];
    for (const auto& [i, j] : entries) {
      os << "," << rho(i, j).real() << "," << rho(i, j).imag();
    }
    os << "," << von_neumann_entropy(rho) << "," << purity(rho) << ","
       << energy_expectation(hamiltonian, rho) << "\n";
  }
  return os.str();
}

}  // namespace decolab::lindblad
