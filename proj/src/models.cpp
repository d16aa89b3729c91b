#include "qsb/models.hpp"

#include <algorithm>
#include <cmath>

namespace qsb {

EigenDecomposition EigenDecomposition::of(const ComplexMatrix& hermitian) {
  const int d = static_cast<int>(hermitian.rows());
  if (!is_hermitian(hermitian, Tolerances::herm(d)))
    fail(ErrorCode::NonHermitianInput, "EigenDecomposition: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (hermitian + hermitian.adjoint()));
  EigenDecomposition eig;
  eig.eigenvalues = es.eigenvalues();
  eig.eigenvectors = es.eigenvectors();
  eig.gap = d > 1 ? eig.eigenvalues(1) - eig.eigenvalues(0) : 0.0;
  eig.norm = eig.eigenvalues.cwiseAbs().maxCoeff();
  return eig;
}

ComplexMatrix pauli_matrix(char p) {
  ComplexMatrix m(2, 2);
  switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0); break;
    case 'Z': m << 1, 0, 0, -1; break;
    default:
      fail(ErrorCode::ConfigError, std::string("unknown Pauli letter '") + p + "'");
  }
  return m;
}

ComplexMatrix pauli_string_matrix(const std::string& s) {
  if (s.empty()) fail(ErrorCode::ConfigError, "empty Pauli string");
  ComplexMatrix m = pauli_matrix(s[0]);
  for (std::size_t i = 1; i < s.size(); ++i) m = kron(m, pauli_matrix(s[i]));
  return m;
}

namespace {

HamiltonianModel finish_model(HamiltonianModel model) {
  model.eig = EigenDecomposition::of(model.matrix);
  return model;
}

// Single-site operator on qubit `site` of `n` qubits.
ComplexMatrix embed_single(const ComplexMatrix& op, int site, int n) {
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (int q = 0; q < n; ++q)
    m = kron(m, q == site ? op : ComplexMatrix::Identity(2, 2));
  return m;
}

}  // namespace

HamiltonianModel build_single_qubit() {
  HamiltonianModel model;
  model.kind = ModelKind::single_qubit;
  model.n_qubits = 1;
  model.matrix = -pauli_matrix('Z');
  return finish_model(std::move(model));
}

std::vector<std::pair<ComplexMatrix, ComplexMatrix>> jordan_wigner(int n_modes) {
  if (n_modes < 1 || n_modes > 7)
    fail(ErrorCode::TooManyModes, "jordan_wigner: mode count must be in [1, 7]");
  // c_j = Z^(j-1) (x) |0><1| (x) I^(N-j), vacuum = |0...0>.
  ComplexMatrix lower(2, 2);
  lower << 0, 1, 0, 0;  // |0><1|
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> ops;
  for (int j = 0; j < n_modes; ++j) {
    ComplexMatrix c = ComplexMatrix::Identity(1, 1);
    for (int q = 0; q < n_modes; ++q) {
      if (q < j)
        c = kron(c, pauli_matrix('Z'));
      else if (q == j)
        c = kron(c, lower);
      else
        c = kron(c, ComplexMatrix::Identity(2, 2));
    }
    ops.emplace_back(c, c.adjoint());
  }
  return ops;
}

HamiltonianModel build_quadratic_fermion(const ComplexMatrix& h) {
  const int n = static_cast<int>(h.rows());
  if (n > 7) fail(ErrorCode::TooManyModes, "quadratic_fermion: N > 7");
  if (!is_hermitian(h, Tolerances::herm(std::max(2, n))))
    fail(ErrorCode::NonHermitianInput, "quadratic_fermion: h not Hermitian");
  auto ops = jordan_wigner(n);
  const int d = 1 << n;
  ComplexMatrix ham = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(h(i, j)) > 0.0) ham += h(i, j) * ops[i].second * ops[j].first;
  HamiltonianModel model;
  model.kind = ModelKind::quadratic_fermion;
  model.n_qubits = n;
  model.matrix = 0.5 * (ham + ham.adjoint());
  model.fermion_h = h;
  model.fermion_h_norm = operator_norm(h);
  return finish_model(std::move(model));
}

HamiltonianModel build_commuting_local(int n_qubits, const std::vector<PauliTerm>& terms) {
  if (n_qubits < 1 || n_qubits > 10)
    fail(ErrorCode::ConfigError, "commuting_local: qubit count must be in [1, 10]");
  const int d = 1 << n_qubits;
  std::vector<ComplexMatrix> mats;
  for (const auto& t : terms) {
    if (static_cast<int>(t.pauli.size()) != n_qubits)
      fail(ErrorCode::ConfigError, "commuting_local: Pauli string length mismatch");
    mats.push_back(t.coeff * pauli_string_matrix(t.pauli));
  }
  for (std::size_t i = 0; i < mats.size(); ++i)
    for (std::size_t j = i + 1; j < mats.size(); ++j) {
      ComplexMatrix comm = mats[i] * mats[j] - mats[j] * mats[i];
      if (comm.norm() > 1e-10)
        fail(ErrorCode::NonCommutingTerms,
             "commuting_local: terms '" + terms[i].pauli + "' and '" + terms[j].pauli +
                 "' do not commute");
    }
  ComplexMatrix ham = ComplexMatrix::Zero(d, d);
  for (const auto& m : mats) ham += m;

  // Delta_lambda: max difference of consecutive distinct eigenvalues over the
  // per-qubit local sums H_j, by brute-force diagonalization.
  double delta_lambda = 0.0;
  for (int q = 0; q < n_qubits; ++q) {
    ComplexMatrix hj = ComplexMatrix::Zero(d, d);
    bool any = false;
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (terms[i].pauli[q] != 'I') {
        hj += mats[i];
        any = true;
      }
    if (!any) continue;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hj, Eigen::EigenvaluesOnly);
    std::vector<double> distinct;
    for (int k = 0; k < d; ++k) {
      double v = es.eigenvalues()(k);
      if (distinct.empty() || v - distinct.back() > 1e-10) distinct.push_back(v);
    }
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k)
      delta_lambda = std::max(delta_lambda, distinct[k + 1] - distinct[k]);
  }

  HamiltonianModel model;
  model.kind = ModelKind::commuting_local;
  model.n_qubits = n_qubits;
  model.matrix = std::move(ham);
  model.terms = terms;
  model.delta_lambda = delta_lambda;
  return finish_model(std::move(model));
}

HamiltonianModel build_explicit(const ComplexMatrix& h) {
  const int d = static_cast<int>(h.rows());
  if (d < 2 || (d & (d - 1)) != 0)
    fail(ErrorCode::ConfigError, "explicit model: dimension must be a power of two >= 2");
  HamiltonianModel model;
  model.kind = ModelKind::explicit_matrix;
  model.n_qubits = 0;
  while ((1 << model.n_qubits) < d) ++model.n_qubits;
  model.matrix = h;
  return finish_model(std::move(model));
}

CouplingSet coupling_set_for(const HamiltonianModel& model) {
  CouplingSet set;
  auto add_pair = [&](const std::string& label, const ComplexMatrix& a) {
    set.operators.emplace_back(label, a);
    set.operators.emplace_back("-" + label, (-a).eval());
  };
  switch (model.kind) {
    case ModelKind::single_qubit:
      add_pair("X", pauli_matrix('X'));
      break;
    case ModelKind::quadratic_fermion: {
      auto ops = jordan_wigner(model.n_qubits);
      for (int i = 0; i < model.n_qubits; ++i) {
        add_pair("c" + std::to_string(i), ops[i].first);
        add_pair("c" + std::to_string(i) + "^", ops[i].second);
      }
      break;
    }
    case ModelKind::commuting_local:
    case ModelKind::explicit_matrix: {
      const char paulis[3] = {'X', 'Y', 'Z'};
      for (int q = 0; q < model.n_qubits; ++q)
        for (char p : paulis)
          add_pair(std::string(1, p) + std::to_string(q),
                   embed_single(pauli_matrix(p), q, model.n_qubits));
      break;
    }
  }
  set.norm_bound = 0.0;
  for (const auto& [label, a] : set.operators)
    set.norm_bound = std::max(set.norm_bound, operator_norm(a));
  return set;
}

BohrDecomposition bohr_decompose(const ComplexMatrix& a, const EigenDecomposition& eig,
                                 double tol_bohr) {
  const int d = static_cast<int>(eig.eigenvalues.size());
  if (a.rows() != d || a.cols() != d)
    fail(ErrorCode::DimensionMismatch, "bohr_decompose: dims do not match");
  ComplexMatrix a_eig = eig.eigenvectors.adjoint() * a * eig.eigenvectors;

  // Cluster the d^2 raw differences lambda_i - lambda_j.
  std::vector<std::pair<double, std::pair<int, int>>> raw;
  raw.reserve(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      raw.emplace_back(eig.eigenvalues(i) - eig.eigenvalues(j), std::make_pair(i, j));
  std::sort(raw.begin(), raw.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  BohrDecomposition out;
  std::size_t k = 0;
  while (k < raw.size()) {
    std::size_t end = k + 1;
    while (end < raw.size() && raw[end].first - raw[end - 1].first < tol_bohr) ++end;
    double gamma = 0.0;
    for (std::size_t m = k; m < end; ++m) gamma += raw[m].first;
    gamma /= static_cast<double>(end - k);
    ComplexMatrix comp_eig = ComplexMatrix::Zero(d, d);
    for (std::size_t m = k; m < end; ++m) {
      auto [i, j] = raw[m].second;
      comp_eig(i, j) = a_eig(i, j);
    }
    ComplexMatrix comp = eig.eigenvectors * comp_eig * eig.eigenvectors.adjoint();
    if (comp.norm() > 1e-14) {
      out.frequencies.push_back(gamma);
      out.components.emplace(gamma, std::move(comp));
    }
    k = end;
  }
  return out;
}

ComplexMatrix number_operator(const HamiltonianModel& model) {
  if (model.kind != ModelKind::quadratic_fermion)
    fail(ErrorCode::ConfigError, "number_operator: model is not quadratic_fermion");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(model.fermion_h);
  const int n = model.n_qubits;
  for (int k = 0; k < n; ++k)
    if (std::abs(es.eigenvalues()(k)) < 1e-8)
      fail(ErrorCode::ZeroModePresent, "number_operator: near-zero mode of h");
  auto ops = jordan_wigner(n);
  const int d = 1 << n;
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < n; ++k) {
    // b_k = sum_j conj(U_{jk}) c_j with h = U Lambda U^dag.
    ComplexMatrix b = ComplexMatrix::Zero(d, d);
    for (int j = 0; j < n; ++j) b += std::conj(es.eigenvectors()(j, k)) * ops[j].first;
    if (es.eigenvalues()(k) > 0.0)
      total += b.adjoint() * b;
    else
      total += b * b.adjoint();
  }
  return 0.5 * (total + total.adjoint());
}

DensityMatrix thermal_state(const HamiltonianModel& model, Beta beta) {
  const auto& eig = model.eig;
  const int d = model.dim();
  if (beta.infinite) {
    if (eig.gap <= 1e-8)
      fail(ErrorCode::DegenerateGroundState,
           "thermal_state: beta=inf requires a unique ground state");
    ComplexVector ground = eig.eigenvectors.col(0);
    return DensityMatrix((ground * ground.adjoint()).eval());
  }
  if (beta.value < 0.0) fail(ErrorCode::ConfigError, "thermal_state: beta < 0");
  // Shift by the smallest eigenvalue so the largest weight is exactly one.
  Eigen::VectorXd weights(d);
  for (int i = 0; i < d; ++i)
    weights(i) = std::exp(-beta.value * (eig.eigenvalues(i) - eig.eigenvalues(0)));
  weights /= weights.sum();
  ComplexMatrix rho = eig.eigenvectors * weights.cast<Complex>().asDiagonal() *
                      eig.eigenvectors.adjoint();
  return DensityMatrix(0.5 * (rho + rho.adjoint()));
}

}  // namespace qsb
