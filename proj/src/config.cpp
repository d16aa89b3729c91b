#include "qsb/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

namespace qsb {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigError, path + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) config_fail(path + "." + it.key(), "unknown field");
}

double require_positive(const json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  double x = v.get<double>();
  if (!(x > 0.0)) config_fail(path, "must be > 0");
  return x;
}

ComplexMatrix parse_matrix(const json& rows, const std::string& path) {
  if (!rows.is_array() || rows.empty()) config_fail(path, "expected a nested array");
  const int n = static_cast<int>(rows.size());
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      config_fail(path, "matrix must be square");
    for (int j = 0; j < n; ++j) {
      const json& e = row[j];
      if (e.is_number()) {
        m(i, j) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        config_fail(path, "matrix entries are numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

ModelConfig parse_model(const json& obj, const std::string& path) {
  if (!obj.is_object()) config_fail(path, "expected an object");
  if (!obj.contains("kind")) config_fail(path + ".kind", "missing");
  std::string kind = obj["kind"].get<std::string>();
  ModelConfig model;
  if (kind == "single_qubit") {
    reject_unknown(obj, {"kind"}, path);
    model.kind = ModelKind::single_qubit;
  } else if (kind == "quadratic_fermion") {
    reject_unknown(obj, {"kind", "h"}, path);
    if (!obj.contains("h")) config_fail(path + ".h", "missing coefficient matrix");
    model.kind = ModelKind::quadratic_fermion;
    model.fermion_h = parse_matrix(obj["h"], path + ".h");
  } else if (kind == "commuting_local") {
    reject_unknown(obj, {"kind", "n_qubits", "terms"}, path);
    if (!obj.contains("n_qubits") || !obj.contains("terms"))
      config_fail(path, "commuting_local needs n_qubits and terms");
    model.kind = ModelKind::commuting_local;
    model.n_qubits = obj["n_qubits"].get<int>();
    for (const auto& t : obj["terms"]) {
      reject_unknown(t, {"pauli", "coeff"}, path + ".terms[]");
      if (!t.contains("pauli") || !t.contains("coeff"))
        config_fail(path + ".terms[]", "each term needs pauli and coeff");
      model.terms.push_back({t["pauli"].get<std::string>(), t["coeff"].get<double>()});
    }
  } else if (kind == "explicit") {
    reject_unknown(obj, {"kind", "matrix"}, path);
    if (!obj.contains("matrix")) config_fail(path + ".matrix", "missing");
    model.kind = ModelKind::explicit_matrix;
    model.explicit_h = parse_matrix(obj["matrix"], path + ".matrix");
  } else {
    config_fail(path + ".kind", "unknown model kind '" + kind + "'");
  }
  return model;
}

ParamOverrides parse_params(const json& obj, const std::string& path) {
  reject_unknown(obj,
                 {"alpha", "T", "sigma", "tau", "omega_max", "beta", "freq",
                  "quad_nodes", "sampling", "variant"},
                 path);
  ParamOverrides p;
  if (obj.contains("alpha")) p.alpha = require_positive(obj["alpha"], path + ".alpha");
  if (obj.contains("T")) p.T = require_positive(obj["T"], path + ".T");
  if (obj.contains("sigma")) p.sigma = require_positive(obj["sigma"], path + ".sigma");
  if (obj.contains("tau")) p.tau = require_positive(obj["tau"], path + ".tau");
  if (obj.contains("omega_max"))
    p.omega_max = require_positive(obj["omega_max"], path + ".omega_max");
  if (obj.contains("beta")) {
    const json& b = obj["beta"];
    if (b.is_string() && b.get<std::string>() == "inf") {
      p.beta = Beta::infinity();
    } else if (b.is_number() && b.get<double>() >= 0.0) {
      p.beta = Beta::finite(b.get<double>());
    } else {
      config_fail(path + ".beta", "must be >= 0 or \"inf\"");
    }
  }
  if (obj.contains("freq")) {
    std::string f = obj["freq"].get<std::string>();
    if (f == "uniform")
      p.freq_kind = FrequencyKind::uniform;
    else if (f == "gaussian_x")
      p.freq_kind = FrequencyKind::gaussian_x;
    else
      config_fail(path + ".freq", "must be \"uniform\" or \"gaussian_x\"");
  }
  if (obj.contains("quad_nodes")) {
    int n = obj["quad_nodes"].get<int>();
    if (n < 2 || n > 512) config_fail(path + ".quad_nodes", "must be in [2, 512]");
    p.quad_nodes = n;
  }
  if (obj.contains("sampling")) {
    const json& s = obj["sampling"];
    if (s.is_string() && s.get<std::string>() == "full_average") {
      p.sampling = SamplingPlan::full_average();
    } else if (s.is_object() && s.contains("monte_carlo")) {
      reject_unknown(s, {"monte_carlo"}, path + ".sampling");
      int n = s["monte_carlo"].get<int>();
      if (n <= 0) config_fail(path + ".sampling.monte_carlo", "must be > 0");
      p.sampling = SamplingPlan::monte_carlo(n);
    } else {
      config_fail(path + ".sampling",
                  "must be \"full_average\" or {\"monte_carlo\": n}");
    }
  }
  if (obj.contains("variant")) {
    std::string v = obj["variant"].get<std::string>();
    if (v != "exact" && v != "trotter")
      config_fail(path + ".variant", "must be \"exact\" or \"trotter\"");
    p.variant = v;
  }
  return p;
}

}  // namespace

HamiltonianModel ModelConfig::build() const {
  switch (kind) {
    case ModelKind::single_qubit:
      return build_single_qubit();
    case ModelKind::quadratic_fermion:
      return build_quadratic_fermion(fermion_h);
    case ModelKind::commuting_local:
      return build_commuting_local(n_qubits, terms);
    case ModelKind::explicit_matrix:
      return build_explicit(explicit_h);
  }
  fail(ErrorCode::ConfigError, "unreachable model kind");
}

ExperimentConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorCode::ConfigError, "config: expected an object");
  reject_unknown(root, {"experiment", "seed", "output", "model", "params", "sweep"},
                 "config");
  if (!root.contains("experiment"))
    fail(ErrorCode::ConfigError, "config.experiment: missing");

  ExperimentConfig cfg;
  cfg.experiment = root["experiment"].get<std::string>();
  if (root.contains("seed")) cfg.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("output")) cfg.output_prefix = root["output"].get<std::string>();
  if (root.contains("model")) cfg.model = parse_model(root["model"], "config.model");
  if (root.contains("params"))
    cfg.params = parse_params(root["params"], "config.params");
  if (root.contains("sweep")) {
    const json& sw = root["sweep"];
    if (!sw.is_object()) fail(ErrorCode::ConfigError, "config.sweep: expected object");
    for (auto it = sw.begin(); it != sw.end(); ++it) {
      if (!it.value().is_array() || it.value().empty())
        fail(ErrorCode::ConfigError,
             "config.sweep." + it.key() + ": expected a non-empty array");
      std::vector<double> values;
      for (const auto& v : it.value()) values.push_back(v.get<double>());
      cfg.sweep[it.key()] = values;
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "config: cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

}  // namespace qsb
