#pragma once

#include <cstdint>
#include <vector>

#include "qsb/filter.hpp"
#include "qsb/linalg.hpp"
#include "qsb/models.hpp"

namespace qsb {

enum class SamplingMode { full_average, monte_carlo };

struct SamplingPlan {
  SamplingMode mode = SamplingMode::full_average;
  int n_samples = 0;  // monte_carlo only

  static SamplingPlan full_average() { return {SamplingMode::full_average, 0}; }
  static SamplingPlan monte_carlo(int n) { return {SamplingMode::monte_carlo, n}; }
};

// All protocol knobs of one channel application.
struct ChannelParams {
  double alpha = 0.1;
  double T = 1.0;  // half-window; evolution covers [-T, T]
  FilterSpec filter;
  Beta beta = Beta::finite(1.0);
  FrequencyDistribution freq;
  CouplingSet coupling;
  double trotter_tau = 0.1;
  SamplingPlan sampling;
  std::uint64_t seed = 0;

  int trotter_steps() const;  // M = ceil(2T / tau)
  double midpoint_f(int m) const;  // f_m = f((m + 1/2) tau - T)
  // alpha * T * sup|f| * ||A_S|| flag for leaving the weak-coupling regime
  bool weak_coupling_warning() const;
  void validate() const;
};

enum class ChannelVariant { exact, trotter };

// rho_E ~ exp(beta omega Z / 2); the ground-state branch is |0><0|.
DensityMatrix bath_state(Beta beta, double omega);

// H (x) I + I (x) (-omega Z/2) + alpha f(t) (A (x) |1><0| + A^dag (x) |0><1|)
ComplexMatrix joint_hamiltonian(const HamiltonianModel& model,
                                const ChannelParams& params, const ComplexMatrix& a_s,
                                double omega, double t);

// Reference time-ordered evolution over [-T, T]: midpoint-frozen Hamiltonian
// exponentials with the step halved until successive unitaries agree to the
// evolve tolerance.
ComplexMatrix sample_unitary_exact(const HamiltonianModel& model,
                                   const ChannelParams& params,
                                   const ComplexMatrix& a_s, double omega);

// Second-order Trotterized evolution: product over m of
// W_m(tau/2) e^{-iH tau} e^{+i omega tau Z/2} W_m(tau/2).
ComplexMatrix sample_unitary_trotter(const HamiltonianModel& model,
                                     const ChannelParams& params,
                                     const ComplexMatrix& a_s, double omega);

// One per-sample application: attach the bath, evolve exactly, trace out.
DensityMatrix evolve_sample_exact(const DensityMatrix& rho, const HamiltonianModel& model,
                                  const ChannelParams& params, const ComplexMatrix& a_s,
                                  double omega);

// Applies the m-th splitting step to a joint system+ancilla state.
ComplexMatrix trotter_step(const ComplexMatrix& rho_joint, const HamiltonianModel& model,
                           const ChannelParams& params, const ComplexMatrix& a_s,
                           double omega, int m);

// The channel with its per-sample unitaries precompiled into Kraus form, so
// repeated applications and superoperator assembly are cheap.
class CompiledChannel {
 public:
  static CompiledChannel build(const HamiltonianModel& model, const ChannelParams& params,
                               ChannelVariant variant);

  int dim() const { return dim_; }
  ComplexMatrix apply(const ComplexMatrix& rho) const;
  DensityMatrix apply(const DensityMatrix& rho) const;
  Superoperator superoperator() const;

  std::size_t sample_count() const { return samples_.size(); }
  double sample_weight(std::size_t i) const { return samples_[i].weight; }
  // Unweighted per-sample sub-channel (itself CPTP).
  ComplexMatrix apply_sample(std::size_t i, const ComplexMatrix& rho) const;

 private:
  struct Sample {
    double weight;
    std::vector<ComplexMatrix> kraus;
  };
  int dim_ = 0;
  std::vector<Sample> samples_;
};

DensityMatrix apply_channel(const DensityMatrix& rho, const HamiltonianModel& model,
                            const ChannelParams& params, ChannelVariant variant);

Superoperator channel_superoperator(const HamiltonianModel& model,
                                    const ChannelParams& params, ChannelVariant variant);

int worker_thread_count();  // QSB_THREADS override, else hardware concurrency

}  // namespace qsb
