#include <doctest.h>

#include <algorithm>

#include "qsb/models.hpp"
#include "test_helpers.hpp"

using namespace qsb;
using namespace qsb::test;

namespace {

// Independent oracle: many-body spectrum of a quadratic Hamiltonian is the
// set of subset sums of the single-particle eigenvalues.
std::vector<double> subset_sum_spectrum(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  const int n = static_cast<int>(h.rows());
  std::vector<double> sums;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      if (mask & (1 << k)) s += es.eigenvalues()(k);
    sums.push_back(s);
  }
  std::sort(sums.begin(), sums.end());
  return sums;
}

}  // namespace

TEST_CASE("single qubit model") {
  HamiltonianModel m = build_single_qubit();
  CHECK(m.eig.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(m.eig.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(m.eig.gap == doctest::Approx(2.0));
  // ground state |0> up to phase
  CHECK(std::abs(m.eig.eigenvectors(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("jordan-wigner convention and anticommutation") {
  auto one = jordan_wigner(1);
  ComplexMatrix expected(2, 2);
  expected << 0, 1, 0, 0;  // |0><1|
  CHECK((one[0].first - expected).norm() == 0.0);

  auto ops = jordan_wigner(3);
  const int d = 8;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      ComplexMatrix acc = ops[i].first * ops[j].second + ops[j].second * ops[i].first;
      ComplexMatrix expect = (i == j) ? ComplexMatrix(ComplexMatrix::Identity(d, d))
                                      : ComplexMatrix(ComplexMatrix::Zero(d, d));
      CHECK((acc - expect).norm() < 1e-12);
      ComplexMatrix acc2 = ops[i].first * ops[j].first + ops[j].first * ops[i].first;
      CHECK(acc2.norm() < 1e-12);
    }

  // number operator of a single mode is a projector
  ComplexMatrix n0 = ops[0].second * ops[0].first;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(n0, Eigen::EigenvaluesOnly);
  for (int k = 0; k < d; ++k) {
    double v = es.eigenvalues()(k);
    CHECK(std::min(std::abs(v), std::abs(v - 1.0)) < 1e-12);
  }
  CHECK_THROWS_AS(jordan_wigner(8), Error);
}

TEST_CASE("quadratic fermion spectra are subset sums") {
  ComplexMatrix h1(1, 1);
  h1 << 1.0;
  HamiltonianModel m1 = build_quadratic_fermion(h1);
  CHECK(m1.eig.eigenvalues(0) == doctest::Approx(0.0));
  CHECK(m1.eig.eigenvalues(1) == doctest::Approx(1.0));

  ComplexMatrix h2 = ComplexMatrix::Zero(2, 2);
  h2(0, 0) = 1.0;
  h2(1, 1) = 2.0;
  HamiltonianModel m2 = build_quadratic_fermion(h2);
  std::vector<double> want = {0.0, 1.0, 2.0, 3.0};
  for (int i = 0; i < 4; ++i) CHECK(m2.eig.eigenvalues(i) == doctest::Approx(want[i]));

  ComplexMatrix hop(2, 2);
  hop << 0, 1, 1, 0;
  HamiltonianModel m3 = build_quadratic_fermion(hop);
  std::vector<double> want3 = {-1.0, 0.0, 0.0, 1.0};
  for (int i = 0; i < 4; ++i)
    CHECK(m3.eig.eigenvalues(i) == doctest::Approx(want3[i]).epsilon(1e-10));

  Rng rng(31);
  for (int n : {3, 4}) {
    ComplexMatrix h = random_hermitian(rng, n);
    HamiltonianModel m = build_quadratic_fermion(h);
    auto oracle = subset_sum_spectrum(h);
    for (int i = 0; i < (1 << n); ++i)
      CHECK(m.eig.eigenvalues(i) == doctest::Approx(oracle[i]).epsilon(1e-9));
  }
}

TEST_CASE("commuting local models") {
  std::vector<PauliTerm> chain = {{"ZZI", 1.0}, {"IZZ", 1.0}};
  HamiltonianModel m = build_commuting_local(3, chain);
  for (int i = 0; i < 8; ++i) {
    double v = m.eig.eigenvalues(i);
    bool in_set = std::abs(v + 2) < 1e-10 || std::abs(v) < 1e-10 || std::abs(v - 2) < 1e-10;
    CHECK(in_set);
  }
  CHECK(m.delta_lambda == doctest::Approx(2.0));

  HamiltonianModel single = build_commuting_local(2, {{"ZI", 1.0}});
  std::vector<double> want = {-1.0, -1.0, 1.0, 1.0};
  for (int i = 0; i < 4; ++i)
    CHECK(single.eig.eigenvalues(i) == doctest::Approx(want[i]));

  CHECK_THROWS_AS(build_commuting_local(2, {{"ZZ", 1.0}, {"XI", 1.0}}), Error);
}

TEST_CASE("coupling sets") {
  CouplingSet toy = coupling_set_for(build_single_qubit());
  CHECK(toy.operators.size() == 2);
  CHECK((toy.operators[0].second - pauli_x()).norm() == 0.0);
  CHECK((toy.operators[1].second + pauli_x()).norm() == 0.0);

  HamiltonianModel comm = build_commuting_local(2, {{"ZZ", 1.0}});
  CHECK(coupling_set_for(comm).operators.size() == 12);

  ComplexMatrix h2 = ComplexMatrix::Zero(2, 2);
  h2(0, 0) = 1.0;
  h2(1, 1) = 2.0;
  CouplingSet ferm = coupling_set_for(build_quadratic_fermion(h2));
  CHECK(ferm.operators.size() == 8);
  for (const auto& [label, a] : ferm.operators)
    CHECK(operator_norm(a) == doctest::Approx(1.0));
}

TEST_CASE("coupling set closure invariants") {
  for (const auto& model :
       {build_single_qubit(), build_commuting_local(2, {{"ZZ", 0.7}})}) {
    CouplingSet set = coupling_set_for(model);
    CHECK(set.norm_bound <= 1.0 + 1e-12);
    for (const auto& [label, a] : set.operators) {
      bool has_negation = false, has_adjoint = false;
      for (const auto& [l2, b] : set.operators) {
        if ((a + b).norm() < 1e-12) has_negation = true;
        if ((a.adjoint() - b).norm() < 1e-12) has_adjoint = true;
      }
      CHECK(has_negation);
      CHECK(has_adjoint);
    }
  }
}

TEST_CASE("bohr decomposition") {
  HamiltonianModel m = build_single_qubit();
  double tol = Tolerances::bohr_default(m.eig.norm);
  BohrDecomposition bd = bohr_decompose(pauli_x(), m.eig, tol);
  REQUIRE(bd.frequencies.size() == 2);
  CHECK(bd.frequencies[0] == doctest::Approx(-2.0));
  CHECK(bd.frequencies[1] == doctest::Approx(2.0));
  CHECK((bd.components.at(2.0) - ketbra(1, 0)).norm() < 1e-12);
  CHECK((bd.components.at(-2.0) - ketbra(0, 1)).norm() < 1e-12);

  BohrDecomposition bz = bohr_decompose(pauli_z(), m.eig, tol);
  REQUIRE(bz.frequencies.size() == 1);
  CHECK(bz.frequencies[0] == doctest::Approx(0.0));
  CHECK((bz.components.at(bz.frequencies[0]) - pauli_z()).norm() < 1e-12);

  BohrDecomposition bh = bohr_decompose(m.matrix, m.eig, tol);
  CHECK(bh.frequencies.size() == 1);
}

TEST_CASE("bohr components reproduce heisenberg evolution") {
  Rng rng(32);
  HamiltonianModel m = build_commuting_local(2, {{"ZZ", 1.0}, {"ZI", 0.4}});
  ComplexMatrix a = random_hermitian(rng, 4);
  BohrDecomposition bd = bohr_decompose(a, m.eig, Tolerances::bohr_default(m.eig.norm));
  ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
  for (const auto& [g, comp] : bd.components) sum += comp;
  CHECK((sum - a).norm() < 1e-10);

  for (double t : {0.3, 1.7}) {
    ComplexMatrix u = herm_expm(m.matrix, Complex(0, t));
    ComplexMatrix heis = u * a * u.adjoint();
    ComplexMatrix rebuilt = ComplexMatrix::Zero(4, 4);
    for (const auto& [g, comp] : bd.components)
      rebuilt += std::exp(Complex(0, g * t)) * comp;
    CHECK((heis - rebuilt).norm() < 1e-8);
  }

  // adjoint pairing A(gamma)^dag = (A^dag)(-gamma)
  BohrDecomposition ba = bohr_decompose(a.adjoint(), m.eig, Tolerances::bohr_default(m.eig.norm));
  for (const auto& [g, comp] : bd.components) {
    bool matched = false;
    for (const auto& [g2, comp2] : ba.components)
      if (std::abs(g2 + g) < 1e-9 && (comp.adjoint() - comp2).norm() < 1e-10)
        matched = true;
    CHECK(matched);
  }
}

TEST_CASE("number operator") {
  ComplexMatrix hp(1, 1);
  hp << 1.0;
  HamiltonianModel mp = build_quadratic_fermion(hp);
  ComplexMatrix np = number_operator(mp);
  auto ops = jordan_wigner(1);
  CHECK((np - ops[0].second * ops[0].first).norm() < 1e-12);
  ComplexVector vac = ComplexVector::Zero(2);
  vac(0) = 1.0;
  CHECK((np * vac).norm() < 1e-12);

  ComplexMatrix hm(1, 1);
  hm << -1.0;
  HamiltonianModel mm = build_quadratic_fermion(hm);
  ComplexMatrix nm = number_operator(mm);
  CHECK((nm - ops[0].first * ops[0].second).norm() < 1e-12);
  // ground state of -c^dag c is the occupied mode
  ComplexVector occ = ComplexVector::Zero(2);
  occ(1) = 1.0;
  CHECK((nm * occ).norm() < 1e-12);

  ComplexMatrix h(2, 2);
  h << 0.1, 1.0, 1.0, 0.1;
  HamiltonianModel m = build_quadratic_fermion(h);
  ComplexMatrix n = number_operator(m);
  ComplexVector ground = m.eig.eigenvectors.col(0);
  CHECK(std::abs((ground.adjoint() * n * ground)(0, 0)) < 1e-10);
  CHECK((n * m.matrix - m.matrix * n).norm() < 1e-10);

  ComplexMatrix hz(2, 2);
  hz << 0.0, 1.0, 1.0, 0.0;
  // eigenvalues +-1, fine; a zero mode must be rejected
  ComplexMatrix hzero = ComplexMatrix::Zero(2, 2);
  hzero(0, 0) = 1.0;
  CHECK_THROWS_AS(number_operator(build_quadratic_fermion(hzero)), Error);
}

TEST_CASE("thermal states") {
  HamiltonianModel m = build_single_qubit();
  DensityMatrix uniform = thermal_state(m, Beta::finite(0.0));
  CHECK((uniform.matrix() - 0.5 * ComplexMatrix::Identity(2, 2)).norm() < 1e-12);

  DensityMatrix gibbs = thermal_state(m, Beta::finite(1.0));
  double e = std::exp(1.0), z = e + 1.0 / e;
  CHECK(gibbs.matrix()(0, 0).real() == doctest::Approx(e / z).epsilon(1e-9));
  CHECK(gibbs.matrix()(1, 1).real() == doctest::Approx((1.0 / e) / z).epsilon(1e-9));
  CHECK(gibbs.matrix()(0, 0).real() == doctest::Approx(0.88080).epsilon(1e-4));

  DensityMatrix ground = thermal_state(m, Beta::infinity());
  CHECK((ground.matrix() - ketbra(0, 0)).norm() < 1e-12);

  // commutes with H
  HamiltonianModel comm = build_commuting_local(2, {{"ZZ", 1.0}, {"XX", 0.5}});
  DensityMatrix rho = thermal_state(comm, Beta::finite(0.7));
  CHECK((rho.matrix() * comm.matrix - comm.matrix * rho.matrix()).norm() < 1e-10);

  // degenerate ground state rejected at beta = inf
  HamiltonianModel degen = build_commuting_local(2, {{"ZI", 1.0}});
  CHECK_THROWS_AS(thermal_state(degen, Beta::infinity()), Error);
}

TEST_CASE("model eigendecomposition reconstructs the matrix") {
  Rng rng(33);
  ComplexMatrix h = random_hermitian(rng, 4);
  HamiltonianModel m = build_explicit(h);
  ComplexMatrix rebuilt = m.eig.eigenvectors *
                          m.eig.eigenvalues.cast<Complex>().asDiagonal() *
                          m.eig.eigenvectors.adjoint();
  CHECK((rebuilt - m.matrix).norm() <= 1e-9 * m.matrix.norm());
  CHECK((m.eig.eigenvectors.adjoint() * m.eig.eigenvectors -
         ComplexMatrix::Identity(4, 4))
            .norm() < 1e-10);
}
