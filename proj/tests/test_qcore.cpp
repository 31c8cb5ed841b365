#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "decolab/qcore.hpp"

using namespace decolab;

namespace {

ComplexMatrix random_matrix(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

ComplexMatrix random_hermitian(int dim, std::mt19937_64& rng) {
  const ComplexMatrix m = random_matrix(dim, rng);
  return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST_CASE("commutator: Pauli algebra") {
  CHECK(commutator(pauli_z(), pauli_z()).norm() == 0.0);

  // [sigma_x, sigma_y] = 2i sigma_z
  const ComplexMatrix lhs = commutator(pauli_x(), pauli_y());
  const ComplexMatrix rhs = Complex(0.0, 2.0) * pauli_z();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("commutator: matches entrywise brute force on random 4x4") {
  std::mt19937_64 rng(11);
  const ComplexMatrix a = random_matrix(4, rng);
  const ComplexMatrix b = random_matrix(4, rng);
  const ComplexMatrix got = commutator(a, b);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Complex expected(0.0, 0.0);
      for (int k = 0; k < 4; ++k) expected += a(i, k) * b(k, j) - b(i, k) * a(k, j);
      CHECK(std::abs(got(i, j) - expected) < 1e-12);
    }
  }
}

TEST_CASE("commutator: dimension mismatch throws") {
  CHECK_THROWS_AS(commutator(pauli_x(), identity_matrix(3)), std::invalid_argument);
}

TEST_CASE("double_commutator: diagonal L picks up (a1-a2)^2 on the coherence") {
  ComplexMatrix l(2, 2), rho(2, 2);
  l << 1.5, 0, 0, -0.5;
  rho << 0, Complex(0.3, 0.1), Complex(0.3, -0.1), 0;
  const ComplexMatrix out = double_commutator(l, rho);
  const double diff2 = (1.5 - (-0.5)) * (1.5 - (-0.5));
  CHECK(std::abs(out(0, 1) - diff2 * rho(0, 1)) < 1e-14);
  CHECK(std::abs(out(0, 0)) < 1e-15);
}

TEST_CASE("double_commutator: identity operator does nothing") {
  std::mt19937_64 rng(3);
  const ComplexMatrix rho = random_hermitian(4, rng);
  CHECK(double_commutator(identity_matrix(4), rho).norm() == 0.0);
}

TEST_CASE("double_commutator: anticommutator identity, hermiticity and trace on dims 2..8") {
  std::mt19937_64 rng(17);
  for (int dim = 2; dim <= 8; ++dim) {
    for (int rep = 0; rep < 20; ++rep) {
      const ComplexMatrix l = random_hermitian(dim, rng);
      const ComplexMatrix rho = random_hermitian(dim, rng);
      const ComplexMatrix direct = double_commutator(l, rho);
      const ComplexMatrix via_anticomm = anticommutator(l * l, rho) - 2.0 * l * rho * l;
      CHECK((direct - via_anticomm).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(hermiticity_defect(direct) < 1e-12);
      CHECK(std::abs(direct.trace()) < 1e-12);
    }
  }
}

TEST_CASE("check_density: maximally mixed and pure qubit") {
  const auto mixed = check_density(ComplexMatrix::Identity(2, 2) * 0.5);
  CHECK(mixed.hermiticity_defect == 0.0);
  CHECK(mixed.trace_defect < 1e-15);
  CHECK(mixed.min_eigenvalue == doctest::Approx(0.5));

  ComplexMatrix pure(2, 2);
  pure << 1, 0, 0, 0;
  const auto rep = check_density(pure);
  CHECK(rep.min_eigenvalue == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("check_density: trace defect flagged") {
  ComplexMatrix rho = ComplexMatrix::Identity(2, 2) * 0.55;  // trace 1.1
  const auto rep = check_density(rho);
  CHECK(rep.trace_defect == doctest::Approx(0.1));
  CHECK_FALSE(rep.ok());
}

TEST_CASE("DensityMatrix: constructor enforces invariants") {
  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix::Identity(2, 2)), std::invalid_argument);
  CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
  ComplexVector psi(2);
  psi << Complex(1, 0), Complex(0, 1);
  const auto rho = DensityMatrix::pure(psi);
  CHECK(check_density(rho.matrix()).ok());
}

TEST_CASE("DephasingChannel: Hermiticity is required") {
  std::mt19937_64 rng(5);
  DephasingChannel bad{random_matrix(2, rng), 1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  DephasingChannel good{pauli_z(), -1.0};
  CHECK_NOTHROW(good.validate());
}

TEST_CASE("json round trip preserves matrices and vectors") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const ComplexMatrix m = random_matrix(3, rng);
    const ComplexMatrix back = matrix_from_json(matrix_to_json(m));
    CHECK((m - back).cwiseAbs().maxCoeff() == 0.0);  // exact: doubles survive json
  }
  ComplexVector v(4);
  v << Complex(1, 2), Complex(-0.25, 0), Complex(0, 1e-17), Complex(3.5, -4.5);
  CHECK((vector_from_json(vector_to_json(v)) - v).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::array()), std::invalid_argument);
}
