#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

// Dense complex linear algebra and the quantum state/operator types shared
// by every other module. All rates and energies are in natural units with
// hbar = 1; dimensions of interest are small (<= 16), so everything is
// dense double-precision.

namespace decolab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct Tolerances {
  double hermiticity = 1e-10;
  double trace = 1e-10;
  double positivity = 1e-8;
};

/// max |M - M^dag| over entries; zero for exactly Hermitian input.
double hermiticity_defect(const ComplexMatrix& m);

bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10);

/// AB - BA. Throws std::invalid_argument on dimension mismatch.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// AB + BA.
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// [L, [L, rho]]; equals {L^2, rho} - 2 L rho L for any square inputs.
ComplexMatrix double_commutator(const ComplexMatrix& l, const ComplexMatrix& rho);

struct DensityReport {
  double hermiticity_defect = 0.0;
  double trace_defect = 0.0;  // |tr(rho) - 1|
  double min_eigenvalue = 0.0;
  bool ok(const Tolerances& tol = {}) const {
    return hermiticity_defect <= tol.hermiticity && trace_defect <= tol.trace &&
           min_eigenvalue >= -tol.positivity;
  }
};

/// Diagnostic only: reports the three density-matrix defects, never throws.
DensityReport check_density(const ComplexMatrix& rho);

/// Trace-one positive-semidefinite Hermitian matrix. The constructor
/// enforces the invariants; use unchecked() for states produced by an
/// integrator that is allowed to drift within its own tolerances.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix rho, const Tolerances& tol = {});

  static DensityMatrix unchecked(ComplexMatrix rho);

  const ComplexMatrix& matrix() const { return rho_; }
  Eigen::Index dim() const { return rho_.rows(); }

  static DensityMatrix pure(const ComplexVector& psi);
  static DensityMatrix maximally_mixed(Eigen::Index dim);

 private:
  DensityMatrix() = default;
  ComplexMatrix rho_;
};

/// One Hermitian dephasing operator L with a signed rate gamma.
/// gamma > 0 drives decoherence (forward noise), gamma < 0 recoherence
/// (backward noise); |gamma| sets the strength.
struct DephasingChannel {
  ComplexMatrix op;
  double gamma = 0.0;

  void validate(double herm_tol = 1e-10) const;
};

// Pauli matrices and friends, used all over the tests and the two-level
// machinery.
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix identity_matrix(Eigen::Index dim);

double frobenius_norm(const ComplexMatrix& m);

// JSON wire format: a matrix is a nested array of [re, im] pairs, row by
// row; a vector is a flat array of [re, im] pairs.
nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const ComplexVector& v);
ComplexVector vector_from_json(const nlohmann::json& j);

}  // namespace decolab
