#include "decolab/qcore.hpp"

#include <Eigen/Eigenvalues>

namespace decolab {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  require_square(a, what);
  require_square(b, what);
  if (a.rows() != b.rows()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch " +
                                std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
  }
}

}  // namespace

double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b, "anticommutator");
  return a * b + b * a;
}

ComplexMatrix double_commutator(const ComplexMatrix& l, const ComplexMatrix& rho) {
  require_same_dim(l, rho, "double_commutator");
  const ComplexMatrix inner = l * rho - rho * l;
  return l * inner - inner * l;
}

DensityReport check_density(const ComplexMatrix& rho) {
  DensityReport rep;
  rep.hermiticity_defect = hermiticity_defect(rho);
  rep.trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
  // Eigenvalues of the Hermitian part; for a valid density matrix the
  // anti-Hermitian part is already covered by the defect above.
  ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  return rep;
}

DensityMatrix::DensityMatrix(ComplexMatrix rho, const Tolerances& tol) {
  require_square(rho, "DensityMatrix");
  DensityReport rep = check_density(rho);
  if (!rep.ok(tol)) {
    throw std::invalid_argument(
        "DensityMatrix: invariants violated (herm defect " + std::to_string(rep.hermiticity_defect) +
        ", trace defect " + std::to_string(rep.trace_defect) + ", min eig " +
        std::to_string(rep.min_eigenvalue) + ")");
  }
  rho_ = std::move(rho);
}

DensityMatrix DensityMatrix::unchecked(ComplexMatrix rho) {
  DensityMatrix d;
  d.rho_ = std::move(rho);
  return d;
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double n2 = psi.squaredNorm();
  if (n2 <= 0.0) throw std::invalid_argument("DensityMatrix::pure: zero state");
  return DensityMatrix((psi * psi.adjoint()) / n2);
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("DensityMatrix::maximally_mixed: dim < 1");
  return DensityMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

void DephasingChannel::validate(double herm_tol) const {
  require_square(op, "DephasingChannel");
  if (!is_hermitian(op, herm_tol)) {
    throw std::invalid_argument("DephasingChannel: operator is not Hermitian (defect " +
                                std::to_string(hermiticity_defect(op)) + ")");
  }
  if (!std::isfinite(gamma)) {
    throw std::invalid_argument("DephasingChannel: gamma is not finite");
  }
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix identity_matrix(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix_from_json: expected non-empty array");
  const auto rows = j.size();
  const auto cols = j.at(0).size();
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (row.size() != cols) throw std::invalid_argument("matrix_from_json: ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      const auto& e = row.at(k);
      if (!e.is_array() || e.size() != 2) {
        throw std::invalid_argument("matrix_from_json: entry must be [re, im]");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

nlohmann::json vector_to_json(const ComplexVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

ComplexVector vector_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("vector_from_json: expected non-empty array");
  ComplexVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j.at(i);
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("vector_from_json: entry must be [re, im]");
    v(static_cast<Eigen::Index>(i)) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
  }
  return v;
}

}  // namespace decolab
