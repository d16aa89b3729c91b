#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qsb/channel.hpp"
#include "qsb/models.hpp"

namespace qsb {

// Inline Hamiltonian description from a config file.
struct ModelConfig {
  ModelKind kind = ModelKind::single_qubit;
  ComplexMatrix fermion_h;            // quadratic_fermion
  int n_qubits = 0;                   // commuting_local
  std::vector<PauliTerm> terms;       // commuting_local
  ComplexMatrix explicit_h;           // explicit

  HamiltonianModel build() const;
};

// Optional overrides; experiments fill in their own defaults first.
struct ParamOverrides {
  std::optional<double> alpha, T, sigma, tau, omega_max;
  std::optional<Beta> beta;
  std::optional<FrequencyKind> freq_kind;
  std::optional<int> quad_nodes;
  std::optional<SamplingPlan> sampling;
  std::optional<std::string> variant;  // "exact" | "trotter"
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string output_prefix;  // may be empty; CLI supplies a directory
  std::optional<ModelConfig> model;
  ParamOverrides params;
  std::map<std::string, std::vector<double>> sweep;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace qsb
