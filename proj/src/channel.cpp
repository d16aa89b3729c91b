#include "qsb/channel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace qsb {

namespace {

ComplexMatrix bath_raising() {
  ComplexMatrix b = ComplexMatrix::Zero(2, 2);
  b(1, 0) = 1.0;  // |1><0|
  return b;
}

// Joint coupling operator A (x) B + A^dag (x) B^dag.
ComplexMatrix joint_coupling(const ComplexMatrix& a) {
  ComplexMatrix b = bath_raising();
  return kron(a, b) + kron(a.adjoint().eval(), b.adjoint().eval());
}

ComplexMatrix decoupled_hamiltonian(const HamiltonianModel& model, double omega) {
  ComplexMatrix zb = ComplexMatrix::Zero(2, 2);
  zb(0, 0) = -0.5 * omega;
  zb(1, 1) = 0.5 * omega;  // -omega Z / 2
  return kron(model.matrix, ComplexMatrix::Identity(2, 2)) +
         kron(ComplexMatrix::Identity(model.dim(), model.dim()), zb);
}

template <typename Matrix>
Matrix evolve_fixed_grid_typed(const Matrix& h0, const Matrix& w,
                               const ChannelParams& params, long steps) {
  const double span = 2.0 * params.T;
  const double h = span / static_cast<double>(steps);
  Matrix u = Matrix::Identity(h0.rows(), h0.cols());
  const Matrix ident = Matrix::Identity(h0.rows(), h0.cols());

  // With small steps the exact exponential of the frozen Hamiltonian is a
  // short Taylor series; pick the degree for ~1e-18 truncation and fall back
  // to the eigensolver when the step is not small.
  double ham_scale = operator_norm(ComplexMatrix(h0)) +
                     params.alpha * params.filter.sup() * operator_norm(ComplexMatrix(w));
  double x = h * ham_scale;
  int degree = 0;
  double term = 1.0;
  while (degree < 12) {
    ++degree;
    term *= x / degree;
    if (term < 1e-18) break;
  }
  const bool series_ok = x < 0.5;

  Eigen::SelfAdjointEigenSolver<Matrix> es;
  Matrix ham(h0.rows(), h0.cols()), step(h0.rows(), h0.cols()),
      acc(h0.rows(), h0.cols());
  ComplexVector phases(h0.rows());
  for (long m = 0; m < steps; ++m) {
    double t_mid = -params.T + (m + 0.5) * h;
    double c = params.alpha * params.filter(t_mid);
    ham = h0 + c * w;
    if (series_ok) {
      // Horner form of exp(X), X = -i h ham
      Matrix xm = Complex(0.0, -h) * ham;
      acc = ident + xm / static_cast<double>(degree);
      for (int k = degree - 1; k >= 1; --k) {
        step.noalias() = xm * acc;
        acc = ident + step / static_cast<double>(k);
      }
      step.noalias() = acc * u;
      u.swap(step);
    } else {
      es.compute(ham);
      for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0.0, -h * es.eigenvalues()(i)));
      step.noalias() =
          es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
      u = step * u;
    }
  }
  // Roundoff over ~1e6 multiplications drifts off the unitary group; the
  // polar factor restores it at the same approximation order.
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  u = svd.matrixU() * svd.matrixV().adjoint();
  return u;
}

ComplexMatrix evolve_fixed_grid(const ComplexMatrix& h0, const ComplexMatrix& w,
                                const ChannelParams& params, long steps) {
  if (h0.rows() == 4) {
    using M4 = Eigen::Matrix4cd;
    M4 u = evolve_fixed_grid_typed<M4>(M4(h0), M4(w), params, steps);
    return ComplexMatrix(u);
  }
  return evolve_fixed_grid_typed<ComplexMatrix>(h0, w, params, steps);
}

struct MonteCarloDraw {
  int coupling_index;
  double omega;
};

std::vector<MonteCarloDraw> pregenerate_draws(const ChannelParams& params) {
  // The sample stream is fixed before any parallel dispatch, so results do
  // not depend on the thread count.
  std::vector<MonteCarloDraw> draws;
  Rng pick = Rng::stream(params.seed, "channel/coupling");
  Rng freq = Rng::stream(params.seed, "channel/omega");
  draws.reserve(params.sampling.n_samples);
  for (int i = 0; i < params.sampling.n_samples; ++i) {
    int idx = static_cast<int>(pick.next_below(params.coupling.operators.size()));
    draws.push_back({idx, params.freq.sample(freq)});
  }
  return draws;
}

}  // namespace

int ChannelParams::trotter_steps() const {
  return static_cast<int>(std::ceil(2.0 * T / trotter_tau));
}

double ChannelParams::midpoint_f(int m) const {
  return filter((m + 0.5) * trotter_tau - T);
}

bool ChannelParams::weak_coupling_warning() const {
  double norm_bound = coupling.norm_bound > 0.0 ? coupling.norm_bound : 1.0;
  return alpha * T * filter.sup() * norm_bound > 0.5;
}

void ChannelParams::validate() const {
  // alpha = 0 is a legitimate decoupled limit used by tests; configs
  // range-check alpha > 0 separately.
  if (alpha < 0.0) fail(ErrorCode::ConfigError, "params.alpha must be >= 0");
  if (T <= 0.0) fail(ErrorCode::ConfigError, "params.T must be > 0");
  if (filter.sigma <= 0.0) fail(ErrorCode::ConfigError, "params.sigma must be > 0");
  if (trotter_tau <= 0.0) fail(ErrorCode::ConfigError, "params.tau must be > 0");
  if (!beta.infinite && beta.value < 0.0)
    fail(ErrorCode::ConfigError, "params.beta must be >= 0 or inf");
  if (sampling.mode == SamplingMode::monte_carlo && sampling.n_samples <= 0)
    fail(ErrorCode::ConfigError, "monte_carlo sample count must be > 0");
  if (coupling.operators.empty())
    fail(ErrorCode::ConfigError, "coupling set is empty");
}

DensityMatrix bath_state(Beta beta, double omega) {
  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  if (beta.infinite) {
    rho(0, 0) = 1.0;
    return DensityMatrix(rho);
  }
  double x = beta.value * omega / 2.0;
  double m = std::abs(x);
  double p0 = std::exp(x - m), p1 = std::exp(-x - m);
  double z = p0 + p1;
  rho(0, 0) = p0 / z;
  rho(1, 1) = p1 / z;
  return DensityMatrix(rho);
}

ComplexMatrix joint_hamiltonian(const HamiltonianModel& model,
                                const ChannelParams& params, const ComplexMatrix& a_s,
                                double omega, double t) {
  return decoupled_hamiltonian(model, omega) +
         params.alpha * params.filter(t) * joint_coupling(a_s);
}

ComplexMatrix sample_unitary_exact(const HamiltonianModel& model,
                                   const ChannelParams& params,
                                   const ComplexMatrix& a_s, double omega) {
  const ComplexMatrix h0 = decoupled_hamiltonian(model, omega);
  const ComplexMatrix w = joint_coupling(a_s);
  const double span = 2.0 * params.T;

  // Initial step from the midpoint-rule error model: the global error is
  // about h^2 * alpha * int|f'| * ||[H0, W]|| / 12 with int|f'| = 2 f(0).
  double comm_scale = 2.0 * h0.norm() * w.norm();
  double err_coef = params.alpha * 2.0 * params.filter.sup() * comm_scale / 12.0;
  double h0_guess = err_coef > 0.0
                        ? std::sqrt(Tolerances::evolve_step / (8.0 * err_coef))
                        : span / 16.0;
  long steps = std::max(16L, static_cast<long>(std::ceil(span / h0_guess)));

  ComplexMatrix prev = evolve_fixed_grid(h0, w, params, steps);
  for (;;) {
    steps *= 2;
    if (span / static_cast<double>(steps) < 1e-6 * params.filter.sigma)
      fail(ErrorCode::NoConvergence,
           "sample_unitary_exact: step underflow before convergence");
    ComplexMatrix cur = evolve_fixed_grid(h0, w, params, steps);
    if ((cur - prev).norm() < 0.5 * Tolerances::evolve_step) return cur;
    prev = std::move(cur);
  }
}

ComplexMatrix sample_unitary_trotter(const HamiltonianModel& model,
                                     const ChannelParams& params,
                                     const ComplexMatrix& a_s, double omega) {
  const int d = model.dim();
  const int jd = 2 * d;
  const double tau = params.trotter_tau;
  const int m_steps = params.trotter_steps();

  ComplexMatrix g = joint_coupling(a_s);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g);
  const ComplexMatrix& vg = es.eigenvectors();

  ComplexMatrix usys = herm_expm(model.matrix, Complex(0.0, -tau));
  ComplexMatrix ubath(2, 2);
  ubath.setZero();
  ubath(0, 0) = std::exp(Complex(0.0, 0.5 * omega * tau));
  ubath(1, 1) = std::exp(Complex(0.0, -0.5 * omega * tau));
  ComplexMatrix core = kron(usys, ubath);
  // Work in the eigenbasis of the coupling so each W_m is diagonal.
  ComplexMatrix core_g = vg.adjoint() * core * vg;

  ComplexMatrix acc = vg.adjoint();
  ComplexVector lam = es.eigenvalues().cast<Complex>();
  for (int m = 0; m < m_steps; ++m) {
    double c = params.alpha * params.midpoint_f(m) * tau / 2.0;
    ComplexVector phase(jd);
    for (int i = 0; i < jd; ++i) phase(i) = std::exp(Complex(0.0, -c) * lam(i));
    acc = phase.asDiagonal() * acc;
    acc = core_g * acc;
    acc = phase.asDiagonal() * acc;
  }
  return vg * acc;
}

DensityMatrix evolve_sample_exact(const DensityMatrix& rho, const HamiltonianModel& model,
                                  const ChannelParams& params, const ComplexMatrix& a_s,
                                  double omega) {
  if (rho.dim() != model.dim())
    fail(ErrorCode::DimensionMismatch, "evolve_sample_exact: dim mismatch");
  ComplexMatrix u = sample_unitary_exact(model, params, a_s, omega);
  ComplexMatrix joint = kron(rho.matrix(), bath_state(params.beta, omega).matrix());
  ComplexMatrix out = partial_trace_last_qubit((u * joint * u.adjoint()).eval());
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

ComplexMatrix trotter_step(const ComplexMatrix& rho_joint, const HamiltonianModel& model,
                           const ChannelParams& params, const ComplexMatrix& a_s,
                           double omega, int m) {
  if (m < 0 || m > params.trotter_steps())
    fail(ErrorCode::ConfigError, "trotter_step: step index out of range");
  const double tau = params.trotter_tau;
  ComplexMatrix w_half = herm_expm(
      joint_coupling(a_s), Complex(0.0, -params.alpha * params.midpoint_f(m) * tau / 2.0));
  ComplexMatrix usys = herm_expm(model.matrix, Complex(0.0, -tau));
  ComplexMatrix ubath = ComplexMatrix::Zero(2, 2);
  ubath(0, 0) = std::exp(Complex(0.0, 0.5 * omega * tau));
  ubath(1, 1) = std::exp(Complex(0.0, -0.5 * omega * tau));
  ComplexMatrix step = w_half * kron(usys, ubath) * w_half;
  return step * rho_joint * step.adjoint();
}

int worker_thread_count() {
  if (const char* env = std::getenv("QSB_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

CompiledChannel CompiledChannel::build(const HamiltonianModel& model,
                                       const ChannelParams& params,
                                       ChannelVariant variant) {
  params.validate();
  const int d = model.dim();

  struct Task {
    const ComplexMatrix* a;
    double omega;
    double weight;
  };
  std::vector<Task> tasks;
  if (params.sampling.mode == SamplingMode::full_average) {
    // The +-A members of a sign pair induce the same per-sample channel
    // (conjugating the ancilla by Z flips the sign and leaves the diagonal
    // bath state invariant), so one representative carries double weight.
    std::vector<const ComplexMatrix*> reps;
    std::vector<bool> used(params.coupling.operators.size(), false);
    for (std::size_t i = 0; i < params.coupling.operators.size(); ++i) {
      if (used[i]) continue;
      for (std::size_t j = i + 1; j < params.coupling.operators.size(); ++j)
        if (!used[j] && (params.coupling.operators[i].second +
                         params.coupling.operators[j].second)
                                .norm() < 1e-12) {
          used[j] = true;
          break;
        }
      reps.push_back(&params.coupling.operators[i].second);
    }
    double rep_weight = 2.0 / static_cast<double>(params.coupling.operators.size());
    QuadRule quad = params.freq.quadrature();
    for (const ComplexMatrix* a : reps)
      for (std::size_t q = 0; q < quad.nodes.size(); ++q)
        tasks.push_back({a, quad.nodes[q], rep_weight * quad.weights[q]});
  } else {
    auto draws = pregenerate_draws(params);
    double w = 1.0 / static_cast<double>(draws.size());
    for (const auto& draw : draws)
      tasks.push_back(
          {&params.coupling.operators[draw.coupling_index].second, draw.omega, w});
  }

  CompiledChannel channel;
  channel.dim_ = d;
  channel.samples_.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      ComplexMatrix u = variant == ChannelVariant::exact
                            ? sample_unitary_exact(model, params, *task.a, task.omega)
                            : sample_unitary_trotter(model, params, *task.a, task.omega);
      DensityMatrix rho_e = bath_state(params.beta, task.omega);
      Sample sample;
      sample.weight = task.weight;
      for (int in = 0; in < 2; ++in) {
        double p = rho_e.matrix()(in, in).real();
        if (p < 1e-300) continue;
        double root = std::sqrt(p);
        for (int out = 0; out < 2; ++out) {
          ComplexMatrix k(d, d);
          for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) k(r, c) = u(2 * r + out, 2 * c + in);
          sample.kraus.push_back(root * k);
        }
      }
      channel.samples_[i] = std::move(sample);
    }
  };
  int n_threads = std::min<int>(worker_thread_count(), static_cast<int>(tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return channel;
}

ComplexMatrix CompiledChannel::apply_sample(std::size_t i, const ComplexMatrix& rho) const {
  ComplexMatrix acc = ComplexMatrix::Zero(dim_, dim_);
  for (const ComplexMatrix& k : samples_[i].kraus) acc += k * rho * k.adjoint();
  return acc;
}

ComplexMatrix CompiledChannel::apply(const ComplexMatrix& rho) const {
  ComplexMatrix out = ComplexMatrix::Zero(dim_, dim_);
  for (const Sample& sample : samples_) {
    ComplexMatrix acc = ComplexMatrix::Zero(dim_, dim_);
    for (const ComplexMatrix& k : sample.kraus) acc += k * rho * k.adjoint();
    out += sample.weight * acc;
  }
  return out;
}

DensityMatrix CompiledChannel::apply(const DensityMatrix& rho) const {
  ComplexMatrix out = apply(rho.matrix());
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

Superoperator CompiledChannel::superoperator() const {
  if (dim_ > 64)
    fail(ErrorCode::DimensionTooLarge, "channel superoperator limited to d <= 64");
  Superoperator s = Superoperator::zero(dim_);
  for (const Sample& sample : samples_)
    for (const ComplexMatrix& k : sample.kraus)
      s.matrix() += sample.weight * kron(k.conjugate(), k);
  return s;
}

DensityMatrix apply_channel(const DensityMatrix& rho, const HamiltonianModel& model,
                            const ChannelParams& params, ChannelVariant variant) {
  return CompiledChannel::build(model, params, variant).apply(rho);
}

Superoperator channel_superoperator(const HamiltonianModel& model,
                                    const ChannelParams& params, ChannelVariant variant) {
  return CompiledChannel::build(model, params, variant).superoperator();
}

}  // namespace qsb
