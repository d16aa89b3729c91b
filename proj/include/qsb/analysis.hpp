#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsb/channel.hpp"
#include "qsb/lindblad.hpp"
#include "qsb/linalg.hpp"

namespace qsb {

struct FixedPointResult {
  DensityMatrix state = DensityMatrix::unchecked(ComplexMatrix());
  double eigenvalue_gap = 0.0;  // 1 - |second largest channel eigenvalue|
  double residual = 0.0;        // ||Phi(rho_fix) - rho_fix||_1
  bool uniqueness_flag = true;  // false when the eigenvalue-1 space is degenerate
};

FixedPointResult fixed_point(const Superoperator& s);

struct MixingReport {
  long tau_mix = 0;          // integer steps
  double t_mix = 0.0;        // alpha^2 * tau_mix
  double epsilon = 0.0;
  std::string probe_set;
  double contraction_rate = 0.0;  // fitted per-step factor of the probe distances
};

std::vector<DensityMatrix> default_probe_states(int dim, std::uint64_t seed,
                                                int n_haar = 20);

// Probe-based estimate of Def.-style mixing: smallest t with
// max_probes ||Phi^t(rho) - target||_1 <= eps. A lower bound on the true
// sup-based mixing time; alpha feeds the rescaled t_mix.
MixingReport mixing_time_empirical(const Superoperator& channel,
                                   const DensityMatrix& target, double epsilon,
                                   const std::vector<DensityMatrix>& probes,
                                   double alpha, long max_steps = 1000000);

// Largest singular value of the weighted similarity transform of the channel
// restricted to the complement of sqrt(rho_beta); < 1 certifies geometric
// mixing at that rate.
double weighted_contraction_rate(const Superoperator& channel,
                                 const DensityMatrix& rho_beta);

// Certified upper bound tau <= log(2 ||rho_beta^{-1/2}|| / eps) / (-log rate) + 1.
double certified_mixing_bound(double rate, const DensityMatrix& rho_beta, double epsilon);

struct SpectralGapResult {
  double gap = 0.0;
  DetailedBalanceReport report;
};

SpectralGapResult spectral_gap_detailed_balance(const GeneratorBundle& gen,
                                                const DensityMatrix& rho_beta);

struct TransferBounds {
  double fixed_point_distance = 0.0;  // ||rho_1 - rho_2||_1
  double map_distance = 0.0;          // ||Phi_1 - Phi_2||_{1<->1} estimate
  double residual_at_rho2 = 0.0;      // ||Phi_1(rho_2) - rho_2||_1
  long tau1 = 0;                      // tau_mix of Phi_1 at eps
  long tau1_half = 0;                 // tau_mix of Phi_1 at eps/2
  long tau2_4eps = 0;                 // tau_mix of Phi_2 at 4 eps
  double bound1 = 0.0;                // eps + tau1 * map_distance
  double bound2 = 0.0;                // eps + tau1 * residual_at_rho2
  bool bound1_holds = false;
  bool bound2_holds = false;
  bool bound3_applicable = false;     // tau1(eps/2) * map_distance <= eps
  bool bound3_holds = false;          // tau2(4 eps) <= tau1(eps/2)
};

TransferBounds transfer_bounds(const Superoperator& phi1, const Superoperator& phi2,
                               double epsilon, std::uint64_t probe_seed,
                               long max_steps = 1000000);

struct NumberDecayTrace {
  std::vector<double> number_expectation;   // Tr(rho_k N)
  std::vector<double> fidelity_lower_bound; // 1 - Tr(rho_k N)
  double decay_factor = 1.0;                // fitted per-step multiplier
};

NumberDecayTrace number_decay_trace(const CompiledChannel& channel,
                                    const HamiltonianModel& model,
                                    const DensityMatrix& rho0, int steps);

}  // namespace qsb
