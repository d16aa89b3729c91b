#include "qsb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qsb {

namespace {

bool trace_preserving(const Superoperator& s, double tol) {
  ComplexVector id = vec(ComplexMatrix::Identity(s.dim(), s.dim()).eval());
  return (s.matrix().adjoint() * id - id).norm() <= tol;
}

DensityMatrix clamp_to_state(const ComplexMatrix& x) {
  ComplexMatrix h = 0.5 * (x + x.adjoint());
  Complex tr = h.trace();
  if (std::abs(tr) < 1e-12)
    fail(ErrorCode::DegenerateInput, "fixed_point: traceless candidate");
  h /= tr;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -Tolerances::fixed_point_clamp)
    fail(ErrorCode::ClampBudgetExceeded,
         "fixed_point: negative part exceeds the clamp budget");
  if (min_eig < 0.0) {
    Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
    clamped /= clamped.sum();
    h = es.eigenvectors() * clamped.cast<Complex>().asDiagonal() *
        es.eigenvectors().adjoint();
  }
  return DensityMatrix(0.5 * (h + h.adjoint()));
}

// Monotone distances let the first-crossing search jump with cached binary
// powers of the superoperator instead of stepping one application at a time.
class PowerOracle {
 public:
  explicit PowerOracle(const Superoperator& s) : base_(s) { powers_.push_back(s); }

  // max over probes of ||unvec(S^t v_p) - target||_1
  double distance_at(long t, const std::vector<ComplexVector>& probes,
                     const ComplexMatrix& target) {
    const int d = base_.dim();
    double worst = 0.0;
    for (const auto& v : probes) {
      ComplexVector cur = v;
      long remaining = t;
      int bit = 0;
      while (remaining > 0) {
        ensure(bit);
        if (remaining & 1) cur = powers_[bit].matrix() * cur;
        remaining >>= 1;
        ++bit;
      }
      worst = std::max(worst, trace_norm(unvec(cur, d, d) - target));
    }
    return worst;
  }

 private:
  void ensure(int bit) {
    while (static_cast<int>(powers_.size()) <= bit)
      powers_.push_back(powers_.back() * powers_.back());
  }
  Superoperator base_;
  std::vector<Superoperator> powers_;
};

}  // namespace

FixedPointResult fixed_point(const Superoperator& s) {
  if (!trace_preserving(s, 1e-9 * s.dim()))
    fail(ErrorCode::DegenerateInput, "fixed_point: channel is not trace preserving");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(s.matrix());
  const int n = static_cast<int>(es.eigenvalues().size());
  int best = 0;
  double best_dist = 1e300;
  int near_one = 0;
  double second = 0.0;
  for (int i = 0; i < n; ++i) {
    double dist = std::abs(es.eigenvalues()(i) - Complex(1.0, 0.0));
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
    if (dist < 1e-10) ++near_one;
  }
  for (int i = 0; i < n; ++i) {
    if (i == best) continue;
    second = std::max(second, std::abs(es.eigenvalues()(i)));
  }
  FixedPointResult out;
  out.uniqueness_flag = near_one <= 1;
  out.eigenvalue_gap = 1.0 - second;
  // A degenerate fixed space may present traceless basis vectors; prefer the
  // near-1 eigenvector with the largest trace, else average the channel orbit
  // of the maximally mixed state into the fixed space.
  const int d = s.dim();
  int pick = best;
  double best_trace = 0.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(es.eigenvalues()(i) - Complex(1.0, 0.0)) > 1e-9) continue;
    double tr = std::abs(unvec(es.eigenvectors().col(i), d, d).trace());
    if (tr > best_trace) {
      best_trace = tr;
      pick = i;
    }
  }
  if (best_trace > 1e-6) {
    out.state = clamp_to_state(unvec(es.eigenvectors().col(pick), d, d));
  } else {
    ComplexVector v = vec((ComplexMatrix::Identity(d, d) / double(d)).eval());
    ComplexVector acc = v;
    for (int k = 0; k < 64; ++k) {
      v = s.matrix() * v;
      acc += v;
    }
    out.state = clamp_to_state(unvec(acc, d, d));
  }
  out.residual = trace_norm(s.apply(out.state.matrix()) - out.state.matrix());
  return out;
}

std::vector<DensityMatrix> default_probe_states(int dim, std::uint64_t seed, int n_haar) {
  std::vector<DensityMatrix> probes;
  for (int i = 0; i < dim; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
    e(i, i) = 1.0;
    probes.push_back(DensityMatrix(e));
  }
  probes.push_back(
      DensityMatrix((ComplexMatrix::Identity(dim, dim) / double(dim)).eval()));
  Rng rng = Rng::stream(seed, "probes/haar");
  for (int k = 0; k < n_haar; ++k) {
    ComplexVector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(rng.normal(), rng.normal());
    v.normalize();
    probes.push_back(DensityMatrix((v * v.adjoint()).eval()));
  }
  return probes;
}

MixingReport mixing_time_empirical(const Superoperator& channel,
                                   const DensityMatrix& target, double epsilon,
                                   const std::vector<DensityMatrix>& probes,
                                   double alpha, long max_steps) {
  if (epsilon <= 0.0 || epsilon >= 2.0)
    fail(ErrorCode::ConfigError, "mixing_time_empirical: epsilon must be in (0, 2)");
  std::vector<ComplexVector> vecs;
  vecs.reserve(probes.size());
  for (const auto& p : probes) vecs.push_back(vec(p.matrix()));

  PowerOracle oracle(channel);
  // Distances to the fixed point are non-increasing under a CPTP map, so the
  // first crossing can be found by doubling + bisection.
  long lo = 0, hi = 1;
  double d_hi = oracle.distance_at(1, vecs, target.matrix());
  MixingReport report;
  report.epsilon = epsilon;
  report.probe_set = std::to_string(probes.size()) + " probes (basis, I/d, Haar)";
  while (d_hi > epsilon) {
    lo = hi;
    if (hi > max_steps)
      fail(ErrorCode::Timeout, "mixing_time_empirical: exceeded max_steps");
    hi *= 2;
    d_hi = oracle.distance_at(hi, vecs, target.matrix());
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    if (oracle.distance_at(mid, vecs, target.matrix()) <= epsilon)
      hi = mid;
    else
      lo = mid;
  }
  report.tau_mix = std::max<long>(1, hi);
  report.t_mix = alpha * alpha * static_cast<double>(report.tau_mix);
  long t1 = report.tau_mix, t0 = std::max<long>(1, t1 / 2);
  if (t1 > t0) {
    double a = oracle.distance_at(t0, vecs, target.matrix());
    double b = oracle.distance_at(t1, vecs, target.matrix());
    if (a > 1e-300 && b > 1e-300)
      report.contraction_rate = std::pow(b / a, 1.0 / double(t1 - t0));
  }
  return report;
}

double weighted_contraction_rate(const Superoperator& channel,
                                 const DensityMatrix& rho_beta) {
  KmsTransform k = kms_transform_superop(channel, rho_beta);
  Superoperator weighted(channel.dim(),
                         (k.hermitian_part.matrix() + k.antihermitian_part.matrix()).eval());
  ComplexVector v = vec(herm_power(rho_beta.matrix(), 0.5)).normalized();
  ComplexMatrix q = orthonormal_complement(v);
  ComplexMatrix restricted = q.adjoint() * weighted.matrix() * q;
  Eigen::JacobiSVD<ComplexMatrix> svd(restricted);
  return svd.singularValues()(0);
}

double certified_mixing_bound(double rate, const DensityMatrix& rho_beta,
                              double epsilon) {
  if (rate >= 1.0) return std::numeric_limits<double>::infinity();
  double amp = operator_norm(herm_power(rho_beta.matrix(), -0.5));
  return std::log(2.0 * amp / epsilon) / (-std::log(rate)) + 1.0;
}

SpectralGapResult spectral_gap_detailed_balance(const GeneratorBundle& gen,
                                                const DensityMatrix& rho_beta) {
  KmsTransform k = kms_transform(gen, rho_beta);
  SpectralGapResult out;
  out.report = k.report;
  out.gap = k.report.hermitian_part_gap;
  return out;
}

TransferBounds transfer_bounds(const Superoperator& phi1, const Superoperator& phi2,
                               double epsilon, std::uint64_t probe_seed,
                               long max_steps) {
  const int d = phi1.dim();
  FixedPointResult f1 = fixed_point(phi1);
  FixedPointResult f2 = fixed_point(phi2);

  auto probes = default_probe_states(d, probe_seed);
  probes.push_back(f2.state);  // the proofs only invoke mixing from rho_2
  probes.push_back(f1.state);

  TransferBounds out;
  out.fixed_point_distance = trace_norm(f1.state.matrix() - f2.state.matrix());
  out.map_distance = induced_trace_norm(phi1 - phi2);
  out.residual_at_rho2 = trace_norm(phi1.apply(f2.state.matrix()) - f2.state.matrix());

  out.tau1 = mixing_time_empirical(phi1, f1.state, epsilon, probes, 1.0, max_steps).tau_mix;
  out.bound1 = epsilon + double(out.tau1) * out.map_distance;
  out.bound2 = epsilon + double(out.tau1) * out.residual_at_rho2;
  out.bound1_holds = out.fixed_point_distance <= out.bound1 + 1e-12;
  out.bound2_holds = out.fixed_point_distance <= out.bound2 + 1e-12;

  out.tau1_half =
      mixing_time_empirical(phi1, f1.state, epsilon / 2.0, probes, 1.0, max_steps).tau_mix;
  out.bound3_applicable = double(out.tau1_half) * out.map_distance <= epsilon;
  if (out.bound3_applicable) {
    out.tau2_4eps =
        mixing_time_empirical(phi2, f2.state, 4.0 * epsilon, probes, 1.0, max_steps).tau_mix;
    out.bound3_holds = out.tau2_4eps <= out.tau1_half;
  }
  return out;
}

NumberDecayTrace number_decay_trace(const CompiledChannel& channel,
                                    const HamiltonianModel& model,
                                    const DensityMatrix& rho0, int steps) {
  ComplexMatrix n_op = number_operator(model);
  NumberDecayTrace trace;
  ComplexMatrix rho = rho0.matrix();
  for (int k = 0; k <= steps; ++k) {
    double value = (n_op * rho).trace().real();
    trace.number_expectation.push_back(value);
    trace.fidelity_lower_bound.push_back(1.0 - value);
    if (k < steps) rho = channel.apply(rho);
  }
  // Least-squares slope of log s_k over the strictly positive stretch.
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < trace.number_expectation.size(); ++k) {
    if (trace.number_expectation[k] <= 1e-12) break;
    xs.push_back(static_cast<double>(k));
    ys.push_back(std::log(trace.number_expectation[k]));
  }
  if (xs.size() >= 2) {
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    trace.decay_factor = std::exp(slope);
  }
  return trace;
}

}  // namespace qsb
