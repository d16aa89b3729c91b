#include "qsb/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "qsb/analysis.hpp"

#ifndef QSB_BUILD_ID
#define QSB_BUILD_ID "unknown"
#endif

namespace qsb {

using nlohmann::json;

namespace {

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Everything one sweep point needs, with experiment defaults resolved.
struct Setup {
  HamiltonianModel model;
  ChannelParams params;
  ChannelVariant variant = ChannelVariant::trotter;
};

struct Context {
  const ExperimentConfig& cfg;
  ResultRecord& record;

  double value_or(const std::optional<double>& o, double fallback) const {
    return o ? *o : fallback;
  }

  // Sweepable parameter: sweep value wins, then config override, then default.
  double resolve(const std::string& name, const std::optional<double>& override_value,
                 double fallback, const std::map<std::string, double>& point) const {
    auto it = point.find(name);
    if (it != point.end()) return it->second;
    return override_value ? *override_value : fallback;
  }
};

json model_echo(const HamiltonianModel& model) {
  json j;
  switch (model.kind) {
    case ModelKind::single_qubit:
      j["kind"] = "single_qubit";
      break;
    case ModelKind::quadratic_fermion: {
      j["kind"] = "quadratic_fermion";
      json rows = json::array();
      for (int i = 0; i < model.fermion_h.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < model.fermion_h.cols(); ++k)
          row.push_back({model.fermion_h(i, k).real(), model.fermion_h(i, k).imag()});
        rows.push_back(row);
      }
      j["h"] = rows;
      break;
    }
    case ModelKind::commuting_local: {
      j["kind"] = "commuting_local";
      j["n_qubits"] = model.n_qubits;
      json terms = json::array();
      for (const auto& t : model.terms)
        terms.push_back({{"pauli", t.pauli}, {"coeff", t.coeff}});
      j["terms"] = terms;
      break;
    }
    case ModelKind::explicit_matrix:
      j["kind"] = "explicit";
      j["dim"] = model.dim();
      break;
  }
  return j;
}

json params_echo(const ChannelParams& p, ChannelVariant variant) {
  json j;
  j["alpha"] = p.alpha;
  j["T"] = p.T;
  j["sigma"] = p.filter.sigma;
  j["tau"] = p.trotter_tau;
  if (p.beta.infinite)
    j["beta"] = "inf";
  else
    j["beta"] = p.beta.value;
  j["freq"] = p.freq.kind == FrequencyKind::uniform ? "uniform" : "gaussian_x";
  j["omega_max"] = p.freq.omega_max;
  j["quad_nodes"] = p.freq.quad_nodes;
  j["sampling"] = p.sampling.mode == SamplingMode::full_average
                      ? json("full_average")
                      : json({{"monte_carlo", p.sampling.n_samples}});
  j["variant"] = variant == ChannelVariant::exact ? "exact" : "trotter";
  j["seed"] = p.seed;
  return j;
}

void echo_config(Context& ctx, const Setup& base,
                 const std::map<std::string, std::vector<double>>& sweep) {
  json j;
  j["experiment"] = ctx.cfg.experiment;
  j["seed"] = ctx.cfg.seed;
  j["model"] = model_echo(base.model);
  j["params"] = params_echo(base.params, base.variant);
  if (!sweep.empty()) {
    json sw;
    for (const auto& [name, values] : sweep) sw[name] = values;
    j["sweep"] = sw;
  }
  ctx.record.config_echo = j.dump();
}

ChannelVariant resolve_variant(const Context& ctx, ChannelVariant fallback) {
  if (!ctx.cfg.params.variant) return fallback;
  return *ctx.cfg.params.variant == "exact" ? ChannelVariant::exact
                                            : ChannelVariant::trotter;
}

FrequencyDistribution resolve_freq(const Context& ctx, double omega_max_default,
                                   double beta_for_gx, double sigma,
                                   FrequencyKind kind_default) {
  double omega_max = ctx.value_or(ctx.cfg.params.omega_max, omega_max_default);
  int nodes = ctx.cfg.params.quad_nodes ? *ctx.cfg.params.quad_nodes : 64;
  FrequencyKind kind =
      ctx.cfg.params.freq_kind ? *ctx.cfg.params.freq_kind : kind_default;
  if (kind == FrequencyKind::uniform)
    return FrequencyDistribution::uniform(omega_max, nodes);
  return FrequencyDistribution::gaussian_x(beta_for_gx, sigma, omega_max, nodes);
}

// One sweep dimension; the spec's grid semantics collapse to single-variable
// sweeps for every named experiment.
std::pair<std::string, std::vector<double>> single_sweep(
    const Context& ctx, const std::string& default_name,
    std::vector<double> default_values) {
  if (ctx.cfg.sweep.empty()) return {default_name, std::move(default_values)};
  if (ctx.cfg.sweep.size() != 1)
    fail(ErrorCode::ConfigError, "config.sweep: exactly one sweep variable supported");
  return *ctx.cfg.sweep.begin();
}

std::vector<double> collect(const std::vector<SweepPoint>& sweep,
                            const std::string& name) {
  std::vector<double> out;
  for (const auto& p : sweep) out.push_back(p.metrics.at(name).scalar);
  return out;
}

// ---------------------------------------------------------------------------
// toy-thermal / toy-ground (single-qubit mixing and fixed point)

void run_toy(Context& ctx, Beta beta_default) {
  HamiltonianModel model =
      ctx.cfg.model ? ctx.cfg.model->build() : build_single_qubit();
  auto [sweep_name, values] = single_sweep(ctx, "sigma", {10.0, 20.0, 40.0});
  ctx.record.sweep_name = sweep_name;

  Beta beta = ctx.cfg.params.beta ? *ctx.cfg.params.beta : beta_default;
  DensityMatrix target = thermal_state(model, beta);
  const double epsilon = 0.01;

  Setup base;
  bool echoed = false;
  for (double v : values) {
    std::map<std::string, double> point{{sweep_name, v}};
    double sigma = ctx.resolve("sigma", ctx.cfg.params.sigma, 10.0, point);
    ChannelParams params;
    params.filter = FilterSpec{sigma};
    params.T = ctx.resolve("T", ctx.cfg.params.T, 8.0 * sigma, point);
    params.alpha = ctx.resolve("alpha", ctx.cfg.params.alpha, 0.4 / sigma, point);
    params.trotter_tau = ctx.resolve("tau", ctx.cfg.params.tau, 0.025, point);
    params.beta = beta;
    params.freq = resolve_freq(ctx, 3.0, beta.infinite ? 1.0 : beta.value, sigma,
                               FrequencyKind::uniform);
    params.coupling = coupling_set_for(model);
    params.sampling =
        ctx.cfg.params.sampling ? *ctx.cfg.params.sampling : SamplingPlan::full_average();
    params.seed = ctx.cfg.seed;
    ChannelVariant variant = resolve_variant(ctx, ChannelVariant::trotter);
    if (!echoed) {
      base = Setup{model, params, variant};
      echoed = true;
    }

    CompiledChannel channel = CompiledChannel::build(model, params, variant);
    Superoperator s = channel.superoperator();

    SweepPoint sp;
    sp.value = v;
    FixedPointResult fp = fixed_point(s);
    sp.metrics["fixed_point_distance"] =
        MetricValue::of(trace_norm(fp.state.matrix() - target.matrix()));
    sp.metrics["fixed_point_residual"] = MetricValue::of(fp.residual);

    auto probes = default_probe_states(model.dim(), ctx.cfg.seed);
    MixingReport mix =
        mixing_time_empirical(s, fp.state, epsilon, probes, params.alpha);
    sp.metrics["tau_mix"] = MetricValue::of(static_cast<double>(mix.tau_mix));
    sp.metrics["t_mix"] = MetricValue::of(mix.t_mix);
    sp.metrics["per_step_rate"] = MetricValue::of(mix.contraction_rate);

    if (!beta.infinite) {
      double rate = weighted_contraction_rate(s, target);
      sp.metrics["weighted_contraction_rate"] = MetricValue::of(rate);
      sp.metrics["certified_tau_bound"] =
          MetricValue::of(certified_mixing_bound(rate, target, epsilon));
    }

    // distance-to-target series from the excited-state probe
    ComplexMatrix rho = ComplexMatrix::Zero(model.dim(), model.dim());
    rho(model.dim() - 1, model.dim() - 1) = 1.0;
    std::vector<double> series;
    long stride = std::max<long>(1, mix.tau_mix / 100);
    long steps_recorded = 0;
    ComplexVector vec_rho = vec(rho);
    for (long k = 0; k <= mix.tau_mix && steps_recorded < 160; k += stride) {
      series.push_back(
          trace_norm(unvec(vec_rho, model.dim(), model.dim()) - target.matrix()));
      for (long inner = 0; inner < stride; ++inner) vec_rho = s.matrix() * vec_rho;
      ++steps_recorded;
    }
    sp.metrics["trace_distance_to_target"] = MetricValue::of_series(std::move(series));
    ctx.record.sweep.push_back(std::move(sp));
  }
  echo_config(ctx, base, {{sweep_name, values}});

  auto tmix = collect(ctx.record.sweep, "t_mix");
  double lo = *std::min_element(tmix.begin(), tmix.end());
  double hi = *std::max_element(tmix.begin(), tmix.end());
  ctx.record.metrics["t_mix_relative_spread"] =
      MetricValue::of((hi - lo) / (0.5 * (hi + lo)));
}

// ---------------------------------------------------------------------------
// lindblad-compare (weak-coupling alpha^4 consistency)

void run_lindblad_compare(Context& ctx) {
  HamiltonianModel model =
      ctx.cfg.model ? ctx.cfg.model->build() : build_single_qubit();
  auto [sweep_name, values] = single_sweep(ctx, "alpha", {0.2, 0.1, 0.05, 0.025});
  ctx.record.sweep_name = sweep_name;

  double sigma = ctx.value_or(ctx.cfg.params.sigma, 2.0);
  double T = ctx.value_or(ctx.cfg.params.T, 12.0);
  Beta beta = ctx.cfg.params.beta ? *ctx.cfg.params.beta : Beta::finite(1.0);
  FrequencyDistribution freq =
      resolve_freq(ctx, 3.0, beta.infinite ? 1.0 : beta.value, sigma,
                   FrequencyKind::uniform);
  CouplingSet coupling = coupling_set_for(model);
  FilterSpec filter{sigma};

  GeneratorBundle gen =
      effective_generator(model, coupling, filter, Window::finite(T), beta, freq);
  Superoperator u_half =
      conjugation_superop(herm_expm(model.matrix, Complex(0, -T)));

  Setup base;
  bool echoed = false;
  for (double v : values) {
    std::map<std::string, double> point{{sweep_name, v}};
    ChannelParams params;
    params.alpha = ctx.resolve("alpha", ctx.cfg.params.alpha, 0.1, point);
    params.T = T;
    params.filter = filter;
    params.beta = beta;
    params.freq = freq;
    params.coupling = coupling;
    params.trotter_tau = ctx.value_or(ctx.cfg.params.tau, 0.05);
    params.sampling = SamplingPlan::full_average();
    params.seed = ctx.cfg.seed;
    ChannelVariant variant = resolve_variant(ctx, ChannelVariant::exact);
    if (!echoed) {
      base = Setup{model, params, variant};
      echoed = true;
    }

    Superoperator phi = channel_superoperator(model, params, variant);
    ComplexMatrix exp_gen =
        (params.alpha * params.alpha * gen.total.matrix()).exp();
    Superoperator lind = u_half * Superoperator(model.dim(), exp_gen) * u_half;

    SweepPoint sp;
    sp.value = v;
    sp.metrics["distance"] = MetricValue::of(induced_trace_norm(phi - lind));
    ctx.record.sweep.push_back(std::move(sp));
  }
  echo_config(ctx, base, {{sweep_name, values}});
  ctx.record.metrics["loglog_slope"] =
      MetricValue::of(fit_loglog_slope(values, collect(ctx.record.sweep, "distance")));
}

// ---------------------------------------------------------------------------
// trotter-scaling (second-order splitting error)

void run_trotter_scaling(Context& ctx) {
  HamiltonianModel model =
      ctx.cfg.model ? ctx.cfg.model->build() : build_single_qubit();
  auto [sweep_name, values] = single_sweep(ctx, "tau", {0.2, 0.1, 0.05});
  ctx.record.sweep_name = sweep_name;

  ChannelParams params;
  params.alpha = ctx.value_or(ctx.cfg.params.alpha, 0.2);
  params.T = ctx.value_or(ctx.cfg.params.T, 12.0);
  params.filter = FilterSpec{ctx.value_or(ctx.cfg.params.sigma, 2.0)};
  params.beta = ctx.cfg.params.beta ? *ctx.cfg.params.beta : Beta::finite(1.0);
  params.freq = resolve_freq(ctx, 3.0, params.beta.infinite ? 1.0 : params.beta.value,
                             params.filter.sigma, FrequencyKind::uniform);
  params.coupling = coupling_set_for(model);
  params.trotter_tau = values.front();
  params.sampling = SamplingPlan::full_average();
  params.seed = ctx.cfg.seed;
  echo_config(ctx, Setup{model, params, ChannelVariant::trotter},
              {{sweep_name, values}});

  Superoperator reference =
      channel_superoperator(model, params, ChannelVariant::exact);
  for (double v : values) {
    ChannelParams p = params;
    p.trotter_tau = v;
    Superoperator approx = channel_superoperator(model, p, ChannelVariant::trotter);
    SweepPoint sp;
    sp.value = v;
    sp.metrics["distance"] = MetricValue::of(induced_trace_norm(approx - reference));
    ctx.record.sweep.push_back(std::move(sp));
  }
  ctx.record.metrics["loglog_slope"] =
      MetricValue::of(fit_loglog_slope(values, collect(ctx.record.sweep, "distance")));
}

// ---------------------------------------------------------------------------
// fixed-point-sweep (thermal fixed-point error trends)

void run_fixed_point_sweep(Context& ctx) {
  HamiltonianModel model =
      ctx.cfg.model ? ctx.cfg.model->build() : build_single_qubit();
  auto [sweep_name, values] = single_sweep(ctx, "sigma", {5.0, 10.0, 20.0});
  ctx.record.sweep_name = sweep_name;
  Beta beta = ctx.cfg.params.beta ? *ctx.cfg.params.beta : Beta::finite(1.0);
  DensityMatrix target = thermal_state(model, beta);

  Setup base;
  bool echoed = false;
  for (double v : values) {
    std::map<std::string, double> point{{sweep_name, v}};
    double sigma = ctx.resolve("sigma", ctx.cfg.params.sigma, 10.0, point);
    ChannelParams params;
    params.filter = FilterSpec{sigma};
    params.T = ctx.resolve("T", ctx.cfg.params.T, 8.0 * sigma, point);
    params.alpha = ctx.resolve("alpha", ctx.cfg.params.alpha, 0.02 / sigma, point);
    params.beta = beta;
    params.freq = resolve_freq(ctx, 3.0, beta.infinite ? 1.0 : beta.value, sigma,
                               FrequencyKind::uniform);
    params.coupling = coupling_set_for(model);
    params.trotter_tau = ctx.value_or(ctx.cfg.params.tau, 0.05);
    params.sampling = SamplingPlan::full_average();
    params.seed = ctx.cfg.seed;
    ChannelVariant variant = resolve_variant(ctx, ChannelVariant::exact);
    if (!echoed) {
      base = Setup{model, params, variant};
      echoed = true;
    }

    Superoperator s = channel_superoperator(model, params, variant);
    FixedPointResult fp = fixed_point(s);
    SweepPoint sp;
    sp.value = v;
    sp.metrics["fixed_point_distance"] =
        MetricValue::of(trace_norm(fp.state.matrix() - target.matrix()));
    sp.metrics["fixed_point_residual"] = MetricValue::of(fp.residual);
    sp.metrics["eigenvalue_gap"] = MetricValue::of(fp.eigenvalue_gap);
    ctx.record.sweep.push_back(std::move(sp));
  }
  echo_config(ctx, base, {{sweep_name, values}});
}

// ---------------------------------------------------------------------------
// fermion-ground (ground-state near-fixedness and number-operator decay)

HamiltonianModel fermion_chain(int n_modes) {
  ComplexMatrix h = ComplexMatrix::Zero(n_modes, n_modes);
  for (int i = 0; i < n_modes; ++i) {
    h(i, i) = 1.0 + 0.05 * i;
    if (i + 1 < n_modes) {
      h(i, i + 1) = 0.3;
      h(i + 1, i) = 0.3;
    }
  }
  return build_quadratic_fermion(h);
}

ChannelParams fermion_channel_params(Context& ctx, const HamiltonianModel& model,
                                     double alpha, double sigma) {
  ChannelParams params;
  params.alpha = alpha;
  params.filter = FilterSpec{sigma};
  params.T = ctx.value_or(ctx.cfg.params.T, 8.0 * sigma);
  params.beta = Beta::infinity();
  params.freq = resolve_freq(ctx, 2.0 * model.fermion_h_norm, 1.0, sigma,
                             FrequencyKind::uniform);
  params.coupling = coupling_set_for(model);
  params.trotter_tau = ctx.value_or(ctx.cfg.params.tau, 0.05);
  params.sampling = SamplingPlan::full_average();
  params.seed = ctx.cfg.seed;
  return params;
}

double fitted_decay_rate(const NumberDecayTrace& trace) {
  return 1.0 - trace.decay_factor;
}

void run_fermion_ground(Context& ctx) {
  // Part 1: || L_tilde(ground) ||_1 against sigma^2 on a two-mode model.
  HamiltonianModel pair =
      ctx.cfg.model ? ctx.cfg.model->build() : [] {
        ComplexMatrix h(2, 2);
        h << 1.0, 0.4, 0.4, 1.3;
        return build_quadratic_fermion(h);
      }();
  if (pair.kind != ModelKind::quadratic_fermion)
    fail(ErrorCode::ConfigError, "fermion-ground requires a quadratic_fermion model");
  auto [sweep_name, values] = single_sweep(ctx, "sigma", {1.0, 1.5, 2.0, 2.5});
  ctx.record.sweep_name = sweep_name;

  double delta = pair.eig.gap;
  DensityMatrix ground = thermal_state(pair, Beta::infinity());
  CouplingSet coupling = coupling_set_for(pair);
  FrequencyDistribution freq = resolve_freq(ctx, 2.0 * pair.fermion_h_norm, 1.0, 1.0,
                                            FrequencyKind::uniform);
  for (double v : values) {
    FilterSpec filter{v};
    GeneratorBundle gen = effective_generator(pair, coupling, filter,
                                              Window::infinity(), Beta::infinity(), freq);
    SweepPoint sp;
    sp.value = v;
    sp.metrics["generator_norm_on_ground"] =
        MetricValue::of(trace_norm(gen.total.apply(ground.matrix())));
    ctx.record.sweep.push_back(std::move(sp));
  }
  std::vector<double> sigma_sq;
  for (double v : values) sigma_sq.push_back(v * v);
  double slope =
      fit_semilog_slope(sigma_sq, collect(ctx.record.sweep, "generator_norm_on_ground"));
  ctx.record.metrics["fitted_exponent"] = MetricValue::of(-slope);
  ctx.record.metrics["gap"] = MetricValue::of(delta);
  ctx.record.metrics["target_exponent"] = MetricValue::of(delta * delta / 32.0);

  // Part 2: number-operator decay of the channel on gapped chains.
  double alpha = ctx.value_or(ctx.cfg.params.alpha, 0.25);
  double sigma = ctx.value_or(ctx.cfg.params.sigma, 3.0);

  HamiltonianModel chain3 = fermion_chain(3);
  ChannelParams params3 = fermion_channel_params(ctx, chain3, alpha, sigma);
  CompiledChannel channel3 =
      CompiledChannel::build(chain3, params3, resolve_variant(ctx, ChannelVariant::trotter));
  ComplexMatrix occ3 = ComplexMatrix::Zero(chain3.dim(), chain3.dim());
  occ3(chain3.dim() - 1, chain3.dim() - 1) = 1.0;
  NumberDecayTrace decay3 =
      number_decay_trace(channel3, chain3, DensityMatrix(occ3), 120);
  ctx.record.metrics["number_series_n3"] =
      MetricValue::of_series(decay3.number_expectation);
  ctx.record.metrics["fidelity_series_n3"] =
      MetricValue::of_series(decay3.fidelity_lower_bound);
  ctx.record.metrics["decay_rate_n3"] = MetricValue::of(fitted_decay_rate(decay3));

  double rates[2];
  int idx = 0;
  for (int n : {2, 4}) {
    HamiltonianModel chain = fermion_chain(n);
    ChannelParams params = fermion_channel_params(ctx, chain, alpha, sigma);
    CompiledChannel channel = CompiledChannel::build(
        chain, params, resolve_variant(ctx, ChannelVariant::trotter));
    ComplexMatrix occ = ComplexMatrix::Zero(chain.dim(), chain.dim());
    occ(chain.dim() - 1, chain.dim() - 1) = 1.0;
    NumberDecayTrace decay = number_decay_trace(channel, chain, DensityMatrix(occ), 120);
    rates[idx++] = fitted_decay_rate(decay);
  }
  ctx.record.metrics["decay_rate_n2"] = MetricValue::of(rates[0]);
  ctx.record.metrics["decay_rate_n4"] = MetricValue::of(rates[1]);
  ctx.record.metrics["rate_ratio_n2_n4"] = MetricValue::of(rates[0] / rates[1]);

  Setup base{pair, fermion_channel_params(ctx, pair, alpha, sigma),
             resolve_variant(ctx, ChannelVariant::trotter)};
  echo_config(ctx, base, {{sweep_name, values}});
}

// ---------------------------------------------------------------------------
// fermion-thermal (KMS diagnostics with the gaussian_x frequency family)

void run_fermion_thermal(Context& ctx) {
  HamiltonianModel model =
      ctx.cfg.model ? ctx.cfg.model->build() : [] {
        ComplexMatrix h(2, 2);
        h << 1.0, 0.3, 0.3, 1.2;
        return build_quadratic_fermion(h);
      }();
  auto [sweep_name, values] = single_sweep(ctx, "sigma", {4.0, 8.0, 16.0});
  ctx.record.sweep_name = sweep_name;

  Beta beta = ctx.cfg.params.beta ? *ctx.cfg.params.beta : Beta::finite(1.0);
  DensityMatrix gibbs = thermal_state(model, beta);
  CouplingSet coupling = coupling_set_for(model);
  double omega_max = ctx.value_or(ctx.cfg.params.omega_max, 2.0 * model.fermion_h_norm);

  Setup base;
  bool echoed = false;
  for (double v : values) {
    FilterSpec filter{v};
    int nodes = ctx.cfg.params.quad_nodes ? *ctx.cfg.params.quad_nodes : 64;
    FrequencyDistribution freq =
        ctx.cfg.params.freq_kind && *ctx.cfg.params.freq_kind == FrequencyKind::uniform
            ? FrequencyDistribution::uniform(omega_max, nodes)
            : FrequencyDistribution::gaussian_x(beta.value, v, omega_max, nodes);

    GeneratorBundle gen = effective_generator(model, coupling, filter,
                                              Window::infinity(), beta, freq);
    KmsTransform diss_k = kms_transform_superop(gen.dissipative, gibbs);
    KmsTransform full_k = kms_transform(gen, gibbs);

    SweepPoint sp;
    sp.value = v;
    sp.metrics["dissipative_kms_residual"] = MetricValue::of(diss_k.report.kms_residual);
    sp.metrics["drift_commutator"] = MetricValue::of(full_k.report.drift_commutator);
    sp.metrics["dbc_violation"] = MetricValue::of(diss_k.report.kms_residual +
                                                  full_k.report.drift_commutator);
    sp.metrics["r_integral"] = MetricValue::of(r_integral(freq, beta, v));
    sp.metrics["generator_norm_on_gibbs"] =
        MetricValue::of(trace_norm(gen.total.apply(gibbs.matrix())));

    ChannelParams params;
    params.alpha = ctx.value_or(ctx.cfg.params.alpha, 0.4 / v);
    params.T = ctx.value_or(ctx.cfg.params.T, 8.0 * v);
    params.filter = filter;
    params.beta = beta;
    params.freq = freq;
    params.coupling = coupling;
    params.trotter_tau = ctx.value_or(ctx.cfg.params.tau, 0.05);
    params.sampling = SamplingPlan::full_average();
    params.seed = ctx.cfg.seed;
    Superoperator s =
        channel_superoperator(model, params, resolve_variant(ctx, ChannelVariant::trotter));
    double rate = weighted_contraction_rate(s, gibbs);
    sp.metrics["weighted_contraction_rate"] = MetricValue::of(rate);
    FixedPointResult fp = fixed_point(s);
    sp.metrics["fixed_point_distance"] =
        MetricValue::of(trace_norm(fp.state.matrix() - gibbs.matrix()));
    if (!echoed) {
      base = Setup{model, params, resolve_variant(ctx, ChannelVariant::trotter)};
      echoed = true;
    }
    ctx.record.sweep.push_back(std::move(sp));
  }
  echo_config(ctx, base, {{sweep_name, values}});
}

// ---------------------------------------------------------------------------
// commuting-davies (weighted Davies comparison)

HamiltonianModel default_commuting_pair() {
  return build_commuting_local(2, {{"ZZ", 0.9}, {"ZI", 0.35}, {"IZ", 0.35}});
}

void run_commuting_davies(Context& ctx) {
  HamiltonianModel model =
      ctx.cfg.model ? ctx.cfg.model->build() : default_commuting_pair();
  auto [sweep_name, values] = single_sweep(ctx, "sigma", {4.0, 8.0, 16.0, 32.0});
  ctx.record.sweep_name = sweep_name;

  Beta beta = ctx.cfg.params.beta ? *ctx.cfg.params.beta : Beta::finite(0.5);
  DensityMatrix gibbs = thermal_state(model, beta);
  CouplingSet coupling = coupling_set_for(model);
  double omega_max = ctx.value_or(ctx.cfg.params.omega_max, 2.0 * model.delta_lambda);
  int nodes = ctx.cfg.params.quad_nodes ? *ctx.cfg.params.quad_nodes : 64;
  FrequencyDistribution freq = FrequencyDistribution::uniform(omega_max, nodes);
  double tol_bohr = Tolerances::bohr_default(model.eig.norm);

  ChannelParams params_echo_only;
  params_echo_only.filter = FilterSpec{values.front()};
  params_echo_only.T = 8.0 * values.front();
  params_echo_only.beta = beta;
  params_echo_only.freq = freq;
  params_echo_only.coupling = coupling;
  params_echo_only.seed = ctx.cfg.seed;
  echo_config(ctx, Setup{model, params_echo_only, ChannelVariant::trotter},
              {{sweep_name, values}});

  for (double v : values) {
    FilterSpec filter{v};
    double cf = kernel_square_integral(filter);
    GeneratorBundle tilde =
        effective_generator(model, coupling, filter, Window::infinity(), beta, freq,
                            GeneratorParts{false, true});
    GeneratorBundle davies = davies_generator(
        coupling, model.eig,
        [&](double xi) { return cf * gamma_weight(beta, freq, xi); }, tol_bohr);

    SweepPoint sp;
    sp.value = v;
    sp.metrics["davies_distance"] =
        MetricValue::of(induced_trace_norm(tilde.dissipative - davies.dissipative));
    KmsTransform davies_k = kms_transform(davies, gibbs);
    sp.metrics["davies_kms_residual"] = MetricValue::of(davies_k.report.kms_residual);
    SpectralGapResult gap = spectral_gap_detailed_balance(davies, gibbs);
    sp.metrics["davies_gap"] = MetricValue::of(gap.gap);
    ctx.record.sweep.push_back(std::move(sp));
  }
  ctx.record.metrics["loglog_slope"] = MetricValue::of(
      fit_loglog_slope(values, collect(ctx.record.sweep, "davies_distance")));
}

// ---------------------------------------------------------------------------
// dbc-report (detailed-balance residuals and gaps)

void run_dbc_report(Context& ctx) {
  HamiltonianModel model =
      ctx.cfg.model ? ctx.cfg.model->build() : default_commuting_pair();
  auto [sweep_name, values] = single_sweep(ctx, "sigma", {4.0, 8.0, 16.0});
  ctx.record.sweep_name = sweep_name;

  Beta beta = ctx.cfg.params.beta ? *ctx.cfg.params.beta : Beta::finite(0.5);
  DensityMatrix gibbs = thermal_state(model, beta);
  CouplingSet coupling = coupling_set_for(model);
  double omega_max = ctx.value_or(ctx.cfg.params.omega_max, 2.0 * model.delta_lambda);
  int nodes = ctx.cfg.params.quad_nodes ? *ctx.cfg.params.quad_nodes : 64;
  FrequencyDistribution freq = FrequencyDistribution::uniform(omega_max, nodes);
  double tol_bohr = Tolerances::bohr_default(model.eig.norm);

  GeneratorBundle davies = davies_generator(
      coupling, model.eig, [&](double xi) { return gamma_weight(beta, freq, xi); },
      tol_bohr);
  KmsTransform davies_k = kms_transform(davies, gibbs);
  ctx.record.metrics["gibbs_davies_kms_residual"] =
      MetricValue::of(davies_k.report.kms_residual);
  SpectralGapResult davies_gap = spectral_gap_detailed_balance(davies, gibbs);
  ctx.record.metrics["gibbs_davies_gap"] = MetricValue::of(davies_gap.gap);

  ChannelParams params_echo_only;
  params_echo_only.filter = FilterSpec{values.front()};
  params_echo_only.T = 8.0 * values.front();
  params_echo_only.beta = beta;
  params_echo_only.freq = freq;
  params_echo_only.coupling = coupling;
  params_echo_only.seed = ctx.cfg.seed;
  echo_config(ctx, Setup{model, params_echo_only, ChannelVariant::trotter},
              {{sweep_name, values}});

  for (double v : values) {
    FilterSpec filter{v};
    GeneratorBundle tilde =
        effective_generator(model, coupling, filter, Window::infinity(), beta, freq);
    KmsTransform diss_k = kms_transform_superop(tilde.dissipative, gibbs);
    KmsTransform full_k = kms_transform(tilde, gibbs);
    SweepPoint sp;
    sp.value = v;
    sp.metrics["dissipative_kms_residual"] = MetricValue::of(diss_k.report.kms_residual);
    sp.metrics["drift_commutator"] = MetricValue::of(full_k.report.drift_commutator);
    sp.metrics["dbc_violation"] = MetricValue::of(diss_k.report.kms_residual +
                                                  full_k.report.drift_commutator);
    sp.metrics["hermitian_part_gap"] =
        MetricValue::of(diss_k.report.hermitian_part_gap);
    sp.metrics["r_integral"] = MetricValue::of(r_integral(freq, beta, v));
    ctx.record.sweep.push_back(std::move(sp));
  }
}

}  // namespace

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(std::max(ys[i], 1e-300)));
  }
  return fit_slope(lx, ly);
}

double fit_semilog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> ly;
  for (double y : ys) ly.push_back(std::log(std::max(y, 1e-300)));
  return fit_slope(xs, ly);
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "toy-thermal",      "toy-ground",      "lindblad-compare",
      "trotter-scaling",  "fixed-point-sweep", "fermion-ground",
      "fermion-thermal",  "commuting-davies", "dbc-report"};
  return names;
}

ResultRecord run_experiment(const ExperimentConfig& cfg) {
  ResultRecord record;
  record.experiment = cfg.experiment;
  record.build_id = QSB_BUILD_ID;
  record.seed = cfg.seed;
  record.output_prefix = cfg.output_prefix;
  Context ctx{cfg, record};

  auto start = std::chrono::steady_clock::now();
  try {
    if (cfg.experiment == "toy-thermal")
      run_toy(ctx, Beta::finite(1.0));
    else if (cfg.experiment == "toy-ground")
      run_toy(ctx, Beta::infinity());
    else if (cfg.experiment == "lindblad-compare")
      run_lindblad_compare(ctx);
    else if (cfg.experiment == "trotter-scaling")
      run_trotter_scaling(ctx);
    else if (cfg.experiment == "fixed-point-sweep")
      run_fixed_point_sweep(ctx);
    else if (cfg.experiment == "fermion-ground")
      run_fermion_ground(ctx);
    else if (cfg.experiment == "fermion-thermal")
      run_fermion_thermal(ctx);
    else if (cfg.experiment == "commuting-davies")
      run_commuting_davies(ctx);
    else if (cfg.experiment == "dbc-report")
      run_dbc_report(ctx);
    else
      fail(ErrorCode::ConfigError, "unknown experiment '" + cfg.experiment + "'");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    record.status = std::string("error: ") + e.what();
  }
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

namespace {

json metric_to_json(const MetricValue& m) {
  if (m.is_series) return json(m.series);
  return json(m.scalar);
}

}  // namespace

std::string render_record_json(const ResultRecord& record) {
  json j;
  j["experiment"] = record.experiment;
  j["build_id"] = record.build_id;
  j["seed"] = record.seed;
  j["status"] = record.status;
  j["wall_clock_seconds"] = record.wall_seconds;
  j["config"] = json::parse(record.config_echo.empty() ? "{}" : record.config_echo);
  json metrics;
  for (const auto& [name, value] : record.metrics) metrics[name] = metric_to_json(value);
  j["metrics"] = metrics;
  if (!record.sweep.empty()) {
    json sweep = json::array();
    for (const auto& p : record.sweep) {
      json pj;
      pj[record.sweep_name] = p.value;
      for (const auto& [name, value] : p.metrics) pj[name] = metric_to_json(value);
      sweep.push_back(pj);
    }
    j["sweep"] = sweep;
  }
  return j.dump(2) + "\n";
}

std::string render_sweep_csv(const ResultRecord& record) {
  if (record.sweep.empty()) return {};
  std::string out = record.sweep_name;
  for (const auto& [name, value] : record.sweep.front().metrics)
    if (!value.is_series) out += "," + name;
  out += "\n";
  for (const auto& p : record.sweep) {
    out += format_double(p.value);
    for (const auto& [name, value] : p.metrics)
      if (!value.is_series) out += "," + format_double(value.scalar);
    out += "\n";
  }
  return out;
}

std::vector<std::string> write_outputs(const ResultRecord& record,
                                       const std::string& output_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(output_dir);
  std::string prefix =
      record.output_prefix.empty() ? record.experiment : record.output_prefix;
  std::vector<std::string> written;

  fs::path json_path = fs::path(output_dir) / (prefix + ".record.json");
  std::ofstream(json_path) << render_record_json(record);
  written.push_back(json_path.string());

  if (!record.sweep.empty()) {
    fs::path csv_path =
        fs::path(output_dir) / (prefix + "." + record.sweep_name + ".csv");
    std::ofstream(csv_path) << render_sweep_csv(record);
    written.push_back(csv_path.string());
  }
  return written;
}

}  // namespace qsb
