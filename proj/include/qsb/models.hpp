#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qsb/linalg.hpp"

namespace qsb {

struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  ComplexMatrix eigenvectors;    // unitary, columns match eigenvalues
  double gap = 0.0;              // lambda_1 - lambda_0
  double norm = 0.0;             // max |lambda|

  static EigenDecomposition of(const ComplexMatrix& hermitian);
};

enum class ModelKind { single_qubit, quadratic_fermion, commuting_local, explicit_matrix };

struct PauliTerm {
  std::string pauli;  // e.g. "ZZI"
  double coeff = 0.0;
};

struct HamiltonianModel {
  ModelKind kind;
  int n_qubits = 0;
  ComplexMatrix matrix;
  EigenDecomposition eig;
  // kind-specific metadata
  ComplexMatrix fermion_h;              // quadratic_fermion coefficient matrix
  double fermion_h_norm = 0.0;
  std::vector<PauliTerm> terms;         // commuting_local
  double delta_lambda = 0.0;            // commuting_local: max nearby eigenvalue gap of the H_j

  int dim() const { return static_cast<int>(matrix.rows()); }
};

struct CouplingSet {
  std::vector<std::pair<std::string, ComplexMatrix>> operators;  // includes sign partners
  double norm_bound = 0.0;
};

struct BohrDecomposition {
  std::vector<double> frequencies;              // distinct, ascending
  std::map<double, ComplexMatrix> components;   // gamma -> A(gamma)
};

ComplexMatrix pauli_matrix(char p);
ComplexMatrix pauli_string_matrix(const std::string& s);

HamiltonianModel build_single_qubit();
HamiltonianModel build_quadratic_fermion(const ComplexMatrix& h);
HamiltonianModel build_commuting_local(int n_qubits, const std::vector<PauliTerm>& terms);
HamiltonianModel build_explicit(const ComplexMatrix& h);

CouplingSet coupling_set_for(const HamiltonianModel& model);

// A(gamma) components of `a` in the eigenbasis of `eig`. The convention is
// pinned by the tests: a component |psi_i><psi_j| carries gamma =
// lambda_i - lambda_j, so exp(iHt) A exp(-iHt) = sum_gamma exp(i gamma t) A(gamma).
BohrDecomposition bohr_decompose(const ComplexMatrix& a, const EigenDecomposition& eig,
                                 double tol_bohr);

// Jordan-Wigner images (c_i, c_i^dag) on N qubits; c = |0><1| at N = 1.
std::vector<std::pair<ComplexMatrix, ComplexMatrix>> jordan_wigner(int n_modes);

// N_hat = sum_{lambda_k > 0} b_k^dag b_k + sum_{lambda_k < 0} b_k b_k^dag in the
// diagonalized mode basis; annihilates the many-body ground state.
ComplexMatrix number_operator(const HamiltonianModel& model);

constexpr double beta_infinity = -1.0;  // sentinel wrapped by Beta below

// Inverse temperature; infinity is an explicit state, not a large float.
struct Beta {
  double value = 0.0;
  bool infinite = false;

  static Beta finite(double b) { return {b, false}; }
  static Beta infinity() { return {0.0, true}; }
};

DensityMatrix thermal_state(const HamiltonianModel& model, Beta beta);

}  // namespace qsb
