#pragma once

#include <functional>

#include "qsb/filter.hpp"
#include "qsb/linalg.hpp"
#include "qsb/models.hpp"

namespace qsb {

enum class GeneratorProvenance { finite_T, tilde, toy, davies, custom };

// A Lindbladian split into its coherent (effective-Hamiltonian) and
// dissipative parts. total = -i[coherent, .] + dissipative.
struct GeneratorBundle {
  int dim;
  ComplexMatrix coherent;     // Hermitian d x d
  Superoperator dissipative;  // d^2 x d^2
  Superoperator total;
  GeneratorProvenance provenance;

  GeneratorBundle(ComplexMatrix coherent_in, Superoperator dissipative_in,
                  GeneratorProvenance provenance_in);

  static GeneratorBundle assemble(ComplexMatrix coherent, Superoperator dissipative,
                                  GeneratorProvenance provenance) {
    return GeneratorBundle(std::move(coherent), std::move(dissipative), provenance);
  }
};

struct DetailedBalanceReport {
  double kms_residual = 0.0;       // ||K - K^dag||_{2<->2}
  double hermitian_part_gap = 0.0; // gap of H on the complement of sqrt(rho_beta)
  double antihermitian_norm = 0.0; // ||(K - K^dag)/2||
  double drift_commutator = 0.0;   // ||rho^-1/4 Hc rho^1/4 - rho^1/4 Hc rho^-1/4||
};

// gamma(w) = (g(w) + g(-w)) / (1 + exp(beta w)); at beta = inf the
// indicator branch (g(w) + g(-w)) 1_{w<0}.
double gamma_weight(Beta beta, const FrequencyDistribution& freq, double omega);

// Thermal branch weights: minus = 1/(1+e^{beta w}), plus = 1/(1+e^{-beta w});
// at beta = inf they degenerate to indicators of the sign of w.
double thermal_weight_minus(Beta beta, double omega);
double thermal_weight_plus(Beta beta, double omega);

// V_{A,f,T}(w) = int_{-T}^{T} f(t) A(t) e^{-iwt} dt, evaluated entrywise in
// the eigenbasis as A_ij K_T(lambda_i - lambda_j - w).
ComplexMatrix jump_operator(const ComplexMatrix& a, const EigenDecomposition& eig,
                            const FilterSpec& filter, Window window, double omega);

// G_{A,f}(w) = int_{-T}^{T} ds1 int_{-T}^{s1} ds2 f(s2) f(s1) A^dag(s2) A(s1)
//              e^{-i w (s1 - s2)}
ComplexMatrix lamb_shift_G(const ComplexMatrix& a, const EigenDecomposition& eig,
                           const FilterSpec& filter, Window window, double omega);

// H_{LS,A}(w) = 2 Im( thm(w) G_{A^dag}(w) + thp(w) G_A(-w) ), Hermitian.
ComplexMatrix lamb_shift_H(const ComplexMatrix& a, const EigenDecomposition& eig,
                           const FilterSpec& filter, Window window, double omega,
                           Beta beta);

// D_V(rho) = V rho V^dag - (1/2){V^dag V, rho}
Superoperator dissipator(const ComplexMatrix& v);

struct GeneratorParts {
  bool coherent = true;
  bool dissipative = true;
};

// The effective Lindbladian of the channel:
//   L(rho) = E_A int ( -i[g(w) H_{LS,A}(w), rho] + gamma(w) D_{V_A(w)}(rho) ) dw
// with the w-integral on the frequency distribution's quadrature. T_mode
// finite uses params' window; infinite the T -> inf closed forms.
GeneratorBundle effective_generator(const HamiltonianModel& model,
                                    const CouplingSet& coupling,
                                    const FilterSpec& filter, Window window,
                                    Beta beta, const FrequencyDistribution& freq,
                                    GeneratorParts parts = {});

// Closed-form single-qubit generator for H = -Z, A = X: rates are
// c_f * gamma(+-2) with c_f = int K^2 evaluated by quadrature, jumps
// |1><0| / |0><1|, plus the diagonal Lamb shift.
GeneratorBundle toy_generator(Beta beta, const FilterSpec& filter,
                              const FrequencyDistribution& freq);

// Davies generator: E_A sum_xi w(xi) D_{A(xi)} from exact Bohr components.
GeneratorBundle davies_generator(const CouplingSet& coupling,
                                 const EigenDecomposition& eig,
                                 const std::function<double(double)>& weight,
                                 double tol_bohr);

// int_R K^2(k) dk for the infinite-window kernel, by quadrature. This is the
// rate constant relating the smoothed dissipative part to the Davies form.
double kernel_square_integral(const FilterSpec& filter);

// Zeroes every Bohr component of v with gamma >= Delta/2, keeping only the
// transitions that cannot leave the ground-state sector.
ComplexMatrix ground_truncated_jump(const ComplexMatrix& v,
                                    const EigenDecomposition& eig, double delta);

struct KmsTransform {
  Superoperator hermitian_part;
  Superoperator antihermitian_part;
  DetailedBalanceReport report;
};

// K(rho_beta, M) = rho^-1/4 M[rho^1/4 . rho^1/4] rho^-1/4 split into
// Hermitian and anti-Hermitian parts under the Hilbert-Schmidt adjoint.
KmsTransform kms_transform(const GeneratorBundle& gen, const DensityMatrix& rho_beta);
// Same transform for an arbitrary superoperator (no drift entry in report).
KmsTransform kms_transform_superop(const Superoperator& s, const DensityMatrix& rho_beta);

// R = int_0^inf | int gamma(w) e^{i w sigma q} dw | e^{-q^2/8} dq
double r_integral(const FrequencyDistribution& freq, Beta beta, double sigma);

}  // namespace qsb
