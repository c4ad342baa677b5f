#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include "support.hpp"

using namespace polglrt;

TEST_CASE("eigh matches a dense reference solver") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 24;
    const Eigen::Index rank = 1 + (trial * 7) % n;
    const Eigen::MatrixXcd a = testing::random_psd(n, rank, gen);
    const auto mine = eigh(a, true);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(a);
    const double scale = ref.eigenvalues().cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) CHECK(std::abs(mine.values(i) - ref.eigenvalues()(i)) <= 1e-9 * scale);
    CHECK(testing::rel_err(max_eigenvalue(a), ref.eigenvalues()(n - 1)) <= 1e-9);
    // Residual and orthonormality.
    const Eigen::MatrixXcd r = a * mine.vectors - mine.vectors * mine.values.asDiagonal();
    CHECK(r.norm() <= 1e-10 * scale * static_cast<double>(n));
    CHECK((mine.vectors.adjoint() * mine.vectors - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-10);
  }
}

TEST_CASE("Jacobi agrees with tridiagonal QL") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 10;
    const Eigen::MatrixXcd a = testing::random_psd(n, n, gen);
    const auto ql = eigh(a, true);
    const auto jc = eigh_jacobi<cplx>(a);
    CHECK((ql.values - jc.values).norm() <= 1e-10 * ql.values.norm());
    // Phase convention makes the dominant vectors coincide, not just up to a phase.
    CHECK((ql.vectors.col(n - 1) - jc.vectors.col(n - 1)).norm() < 1e-8);

    const Eigen::MatrixXd s = a.real();
    const auto jr = eigh_jacobi<double>(s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(s);
    CHECK((jr.values - ref.eigenvalues()).norm() <= 1e-10 * ref.eigenvalues().norm());
  }
}

TEST_CASE("eigenvector phase convention") {
  std::mt19937_64 gen(6);
  const Eigen::MatrixXcd a = testing::random_psd(6, 6, gen);
  const auto r = eigh(a, true);
  for (Eigen::Index j = 0; j < 6; ++j) {
    Eigen::Index k = 0;
    r.vectors.col(j).cwiseAbs().maxCoeff(&k);
    CHECK(std::abs(r.vectors(k, j).imag()) < 1e-12);
    CHECK(r.vectors(k, j).real() > 0.0);
  }
}

TEST_CASE("eigh edge cases") {
  CHECK(max_eigenvalue(Eigen::MatrixXcd::Zero(4, 4)) == 0.0);
  CHECK(max_eigenvalue(Eigen::MatrixXcd::Constant(1, 1, cplx(3.5, 0))) == 3.5);
  const auto id = dominant_eigenpair(Eigen::MatrixXcd::Identity(5, 5));
  CHECK(id.value == 1.0);
  CHECK(id.degenerate);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 5.0;
  d(2, 2) = 2.0;
  const auto top = dominant_eigenpair(d);
  CHECK(top.value == Catch::Approx(5.0));
  CHECK(std::abs(top.vector(1)) == Catch::Approx(1.0));
  CHECK_FALSE(top.degenerate);
}
