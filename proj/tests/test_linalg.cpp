#include <doctest.h>

#include <Eigen/QR>

#include "qsb/linalg.hpp"
#include "test_helpers.hpp"

using namespace qsb;
using namespace qsb::test;

TEST_CASE("kron basics") {
  ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK((kron(i2, i2) - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

  // Z (x) |0><0|, expanded by hand.
  ComplexMatrix zp = kron(pauli_z(), ketbra(0, 0));
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  expected(2, 2) = -1.0;
  CHECK((zp - expected).norm() == 0.0);
}

TEST_CASE("kron mixed-product identity on random input") {
  Rng rng(11);
  ComplexMatrix a = random_matrix(rng, 2, 2), b = random_matrix(rng, 2, 2);
  ComplexVector u = random_state(rng, 2), v = random_state(rng, 2);
  ComplexVector lhs = kron(a, b) * kron(u, v);
  ComplexVector rhs = kron((a * u).eval(), (b * v).eval());
  CHECK((lhs - rhs).norm() < 1e-13);
}

TEST_CASE("kron associative and bilinear") {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    ComplexMatrix a = random_matrix(rng, 2, 3), b = random_matrix(rng, 3, 2),
                  c = random_matrix(rng, 2, 2);
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).norm() < 1e-12);
    Complex s(rng.normal(), rng.normal());
    CHECK((kron(s * a + b.transpose(), c) -
           (s * kron(a, c) + kron(b.transpose(), c)))
              .norm() < 1e-12);
  }
}

TEST_CASE("herm_expm closed forms") {
  ComplexMatrix h = pauli_z();
  CHECK((herm_expm(h, Complex(0, 0)) - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

  // exp(-i (pi/2) X) = cos(pi/2) I - i sin(pi/2) X = -iX
  const double half_pi = 1.5707963267948966;
  ComplexMatrix u = herm_expm(pauli_x(), Complex(0, -half_pi));
  CHECK((u - Complex(0, -1) * pauli_x()).norm() < 1e-13);

  for (double t : {0.1, 1.0, 10.0}) {
    ComplexMatrix w = herm_expm(pauli_z(), Complex(0, -t));
    CHECK((w.adjoint() * w - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
  }

  ComplexMatrix bad(2, 2);
  bad << 0, 1, 2, 0;
  CHECK_THROWS_AS(herm_expm(bad, Complex(0, -1)), Error);
}

TEST_CASE("herm_expm forward-backward is identity") {
  Rng rng(13);
  for (int trial = 0; trial < 4; ++trial) {
    ComplexMatrix h = random_hermitian(rng, 4);
    h *= 10.0 / std::max(1.0, operator_norm(h));
    double t = rng.uniform(-10.0, 10.0);
    ComplexMatrix fwd = herm_expm(h, Complex(0, -t));
    ComplexMatrix bwd = herm_expm(h, Complex(0, t));
    CHECK((fwd * bwd - ComplexMatrix::Identity(4, 4)).norm() < 1e-11);
  }
}

TEST_CASE("partial trace over the ancilla qubit") {
  Rng rng(14);
  ComplexMatrix rho = random_psd_unit_trace(rng, 4);
  ComplexMatrix anc = ketbra(0, 0);
  CHECK((partial_trace_last_qubit(kron(rho, anc)) - rho).norm() < 1e-13);

  // Bell state reduces to I/2.
  ComplexVector bell(4);
  bell << 1, 0, 0, 1;
  bell /= std::sqrt(2.0);
  ComplexMatrix bell_rho = bell * bell.adjoint();
  CHECK((partial_trace_last_qubit(bell_rho) - 0.5 * ComplexMatrix::Identity(2, 2))
            .norm() < 1e-14);

  // Trace preservation on a random 8x8 PSD input against the index-sum oracle.
  ComplexMatrix big = random_psd_unit_trace(rng, 8);
  ComplexMatrix reduced = partial_trace_last_qubit(big);
  Complex oracle = 0.0;
  for (int n = 0; n < 8; ++n) oracle += big(n, n);
  CHECK(std::abs(reduced.trace() - oracle) < 1e-13);

  ComplexMatrix odd = ComplexMatrix::Identity(3, 3);
  CHECK_THROWS_AS(partial_trace_last_qubit(odd), Error);
}

TEST_CASE("partial trace positivity on random PSD inputs") {
  Rng rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    ComplexMatrix rho = random_psd_unit_trace(rng, 8);
    ComplexMatrix red = partial_trace_last_qubit(rho);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(red, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(std::abs(red.trace().real() - 1.0) < 1e-12);
  }
}

TEST_CASE("schatten norms") {
  CHECK(schatten_norm(ComplexMatrix::Identity(5, 5), 1) == doctest::Approx(5.0));
  ComplexMatrix d(2, 2);
  d << 3, 0, 0, -4;
  CHECK(operator_norm(d) == doctest::Approx(4.0));

  Rng rng(16);
  ComplexMatrix m = random_matrix(rng, 4, 4);
  double sq = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) sq += std::norm(m(i, j));
  CHECK(schatten_norm(m, 2) * schatten_norm(m, 2) == doctest::Approx(sq));
}

TEST_CASE("schatten norm ordering") {
  Rng rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    ComplexMatrix m = random_matrix(rng, 5, 5);
    double n1 = trace_norm(m), n2 = schatten_norm(m, 2), ni = operator_norm(m);
    CHECK(n1 >= n2 - 1e-12);
    CHECK(n2 >= ni - 1e-12);
    // dimension-dependent reverse inequalities
    CHECK(n1 <= 5.0 * ni + 1e-12);
    CHECK(n2 <= std::sqrt(5.0) * ni + 1e-12);
  }
}

TEST_CASE("superop_from_left_right matches direct multiplication") {
  Superoperator ident = superop_from_left_right(ComplexMatrix::Identity(2, 2),
                                                ComplexMatrix::Identity(2, 2));
  CHECK((ident.matrix() - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

  Superoperator zz = superop_from_left_right(pauli_z(), pauli_z());
  CHECK((zz.apply(ketbra(0, 1)) + ketbra(0, 1)).norm() < 1e-14);

  Rng rng(18);
  ComplexMatrix l = random_matrix(rng, 3, 3), r = random_matrix(rng, 3, 3),
                x = random_matrix(rng, 3, 3);
  Superoperator s = superop_from_left_right(l, r);
  CHECK((vec((l * x * r).eval()) - s.matrix() * vec(x)).norm() < 1e-12);
  for (int trial = 0; trial < 5; ++trial) {
    ComplexMatrix y = random_matrix(rng, 3, 3);
    CHECK((s.apply(y) - l * y * r).norm() < 1e-12);
  }
}

TEST_CASE("choi representation") {
  const int d = 3;
  Superoperator ident = Superoperator::identity(d);
  ComplexMatrix choi = choi_matrix(ident);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(choi);
  CHECK(es.eigenvalues()(d * d - 1) == doctest::Approx(d));
  for (int i = 0; i < d * d - 1; ++i) CHECK(std::abs(es.eigenvalues()(i)) < 1e-12);
  CHECK(std::abs(choi.trace().real() - d) < 1e-12);

  // Fully depolarizing map X |-> Tr(X) I/d, Choi built from the definition
  // applied to the basis matrices: block (i,j) = delta_ij I/d.
  ComplexMatrix dep = ComplexMatrix::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      dep.col(i + j * d) = (i == j) ? vec((ComplexMatrix::Identity(d, d) / d).eval())
                                    : ComplexVector::Zero(d * d);
  ComplexMatrix dep_choi = choi_matrix(Superoperator(d, dep));
  ComplexMatrix dep_expected = kron(ComplexMatrix::Identity(d, d),
                                    ComplexMatrix::Identity(d, d)) / d;
  CHECK((dep_choi - dep_expected).norm() < 1e-13);

  Superoperator zconj = conjugation_superop(pauli_z());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es2(choi_matrix(zconj));
  CHECK(es2.eigenvalues().minCoeff() > -1e-13);
  CHECK(es2.eigenvalues()(3) == doctest::Approx(2.0));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(es2.eigenvalues()(i)) < 1e-12);
}

TEST_CASE("kraus sums pass CPTP checks") {
  Rng rng(19);
  const int d = 3, nk = 2;
  // Random isometry columns give a Kraus set with sum K^dag K = I.
  ComplexMatrix g = random_matrix(rng, d * nk, d);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d * nk, d);
  Superoperator s = Superoperator::zero(d);
  for (int k = 0; k < nk; ++k) {
    ComplexMatrix kk = q.block(k * d, 0, d, d);
    s += superop_from_left_right(kk, kk.adjoint());
  }
  CptpCheck check = cptp_check(s);
  CHECK(check.choi_min_eigenvalue > -1e-9);
  CHECK(check.trace_preservation_error < 1e-9);
}

TEST_CASE("induced trace norm estimate") {
  CHECK(induced_trace_norm(Superoperator::identity(2)) == doctest::Approx(1.0));
  CHECK(induced_trace_norm(Superoperator::identity(2).scaled(2.0)) ==
        doctest::Approx(2.0));

  Superoperator zconj = conjugation_superop(pauli_z());
  CHECK(induced_trace_norm(zconj) == doctest::Approx(1.0));
  // Unitary conjugation preserves the trace norm of every rank-1 input.
  Rng rng(20);
  for (int trial = 0; trial < 200; ++trial) {
    ComplexVector u = random_state(rng, 2), v = random_state(rng, 2);
    ComplexMatrix x = u * v.adjoint();
    CHECK(trace_norm(zconj.apply(x)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS((DensityMatrix(pauli_x())), Error);  // trace 0
  ComplexMatrix ok = 0.5 * ComplexMatrix::Identity(2, 2);
  DensityMatrix rho(ok);
  CHECK(rho.dim() == 2);
  ComplexMatrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS((DensityMatrix(neg)), Error);
}
