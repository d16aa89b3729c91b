#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "qsb/analysis.hpp"
#include "qsb/lindblad.hpp"
#include "test_helpers.hpp"

using namespace qsb;
using namespace qsb::test;

namespace {

double kPi = 3.14159265358979323846;

Superoperator superop_exp(const Superoperator& s, double t) {
  ComplexMatrix m = (t * s.matrix()).exp();
  return Superoperator(s.dim(), m);
}

}  // namespace

TEST_CASE("gamma weight branches") {
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);
  CHECK(gamma_weight(Beta::finite(0.0), g, 1.0) == doctest::Approx(1.0 / 6.0));
  CHECK(gamma_weight(Beta::infinity(), g, 1.0) == doctest::Approx(0.0));
  CHECK(gamma_weight(Beta::infinity(), g, -1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(gamma_weight(Beta::finite(1.0), g, 2.0) ==
        doctest::Approx((1.0 / 3.0) / (1.0 + std::exp(2.0))).epsilon(1e-9));
  CHECK(gamma_weight(Beta::finite(1.0), g, 2.0) == doctest::Approx(0.03972).epsilon(1e-3));
}

TEST_CASE("filter kernel against quadrature oracle") {
  FilterSpec f{2.0};
  // infinite-window closed form vs direct quadrature of the definition
  for (double k : {0.0, 0.3, 1.0, 2.5}) {
    Complex closed = filter_kernel(f, Window::infinity(), k);
    Complex quad = integrate_adaptive(
        [&](double t) { return f(t) * std::exp(Complex(0, k * t)); }, -40.0, 40.0,
        1e-12, 1e-12, 16);
    CHECK(std::abs(closed - quad) < 1e-10);
  }
  // finite window approaches the infinite one once T >> sigma
  for (double k : {0.0, 1.0}) {
    Complex finite = filter_kernel(f, Window::finite(10.0 * f.sigma), k);
    Complex inf = filter_kernel(f, Window::infinity(), k);
    CHECK(std::abs(finite - inf) < 1e-8);
  }
}

TEST_CASE("filter normalization") {
  for (double sigma : {0.5, 2.0, 8.0}) {
    FilterSpec f{sigma};
    double t_max = 8.0 * sigma;
    Complex sq = integrate_adaptive(
        [&](double t) { return Complex(f(t) * f(t), 0.0); }, -t_max, t_max, 1e-12,
        1e-12, 8);
    CHECK(sq.real() > 0.99);
    CHECK(sq.real() <= 1.0 + 1e-12);
    CHECK(f(1.3) == doctest::Approx(f(-1.3)));
  }
}

TEST_CASE("jump operator structure for the toy model") {
  HamiltonianModel m = build_single_qubit();
  FilterSpec f{2.0};
  // A = I gives K(-w) I
  ComplexMatrix vi = jump_operator(ComplexMatrix::Identity(2, 2), m.eig, f,
                                   Window::infinity(), 0.7);
  Complex k0 = filter_kernel(f, Window::infinity(), -0.7);
  CHECK((vi - k0 * ComplexMatrix::Identity(2, 2)).norm() < 1e-12);

  // A = X: support on (1,0) and (0,1) with Gaussian weights in (w -+ 2)
  double w = 1.3;
  ComplexMatrix vx = jump_operator(pauli_x(), m.eig, f, Window::infinity(), w);
  CHECK(std::abs(vx(0, 0)) < 1e-14);
  CHECK(std::abs(vx(1, 1)) < 1e-14);
  Complex up = filter_kernel(f, Window::infinity(), 2.0 - w);
  Complex down = filter_kernel(f, Window::infinity(), -2.0 - w);
  CHECK(std::abs(vx(1, 0) - up) < 1e-12);
  CHECK(std::abs(vx(0, 1) - down) < 1e-12);
  // Gaussian decay in the off-resonant entry
  CHECK(std::abs(vx(0, 1)) < std::abs(vx(1, 0)));

  // T = 10 sigma matches T = inf entrywise
  ComplexMatrix vfin = jump_operator(pauli_x(), m.eig, f, Window::finite(20.0), 2.0);
  ComplexMatrix vinf = jump_operator(pauli_x(), m.eig, f, Window::infinity(), 2.0);
  CHECK((vfin - vinf).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ordered double integral sanity") {
  FilterSpec f{1.5};
  // at u = v = 0 the ordered integral is half the square of int f
  Complex intf = integrate_adaptive(
      [&](double t) { return Complex(f(t), 0.0); }, -18.0, 18.0, 1e-12, 1e-12, 8);
  Complex j00 = ordered_double_integral(f, Window::infinity(), 0.0, 0.0);
  CHECK(std::abs(j00 - 0.5 * intf * intf) < 1e-8);
  Complex j00_fin = ordered_double_integral(f, Window::finite(12.0 * f.sigma), 0.0, 0.0);
  CHECK(std::abs(j00_fin - j00) < 1e-7);

  // ordered + reversed-order = full product integral K(u) K(v)
  double u = 0.8, v = -0.45;
  Complex juv = ordered_double_integral(f, Window::infinity(), u, v);
  Complex jvu = ordered_double_integral(f, Window::infinity(), v, u);
  Complex ku = filter_kernel(f, Window::infinity(), u);
  Complex kv = filter_kernel(f, Window::infinity(), v);
  CHECK(std::abs(juv + jvu - ku * kv) < 1e-8);

  // finite window agrees with a brute-force nested quadrature oracle
  double T = 4.0;
  Complex brute = 0.0;
  {
    QuadRule outer = composite_gl(-T, T, 64);
    for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
      double s1 = outer.nodes[i];
      QuadRule inner = composite_gl(-T, s1, 64);
      Complex acc = 0.0;
      for (std::size_t k = 0; k < inner.nodes.size(); ++k)
        acc += inner.weights[k] * f(inner.nodes[k]) *
               std::exp(Complex(0, u * inner.nodes[k]));
      brute += outer.weights[i] * f(s1) * std::exp(Complex(0, v * s1)) * acc;
    }
  }
  Complex fin = ordered_double_integral(f, Window::finite(T), u, v);
  CHECK(std::abs(fin - brute) < 1e-8);
}

TEST_CASE("lamb shift G structure") {
  FilterSpec f{4.0};
  HamiltonianModel m = build_single_qubit();
  double w = 0.9;

  // A = I: G = (ordered scalar integral at the shifted frequencies) * I
  ComplexMatrix gi = lamb_shift_G(ComplexMatrix::Identity(2, 2), m.eig, f,
                                  Window::infinity(), 0.0);
  Complex intf = integrate_adaptive(
      [&](double t) { return Complex(f(t), 0.0); }, -48.0, 48.0, 1e-12, 1e-12, 16);
  CHECK(std::abs(gi(0, 0) - 0.5 * intf * intf) < 1e-7);
  CHECK(std::abs(gi(0, 1)) < 1e-12);

  // A = X: G diagonal in the computational basis
  ComplexMatrix gx = lamb_shift_G(pauli_x(), m.eig, f, Window::infinity(), w);
  double diag_scale = std::max(std::abs(gx(0, 0)), std::abs(gx(1, 1)));
  CHECK(std::abs(gx(0, 1)) < 1e-3 * diag_scale);
  CHECK(std::abs(gx(1, 0)) < 1e-3 * diag_scale);

  // [H, G(w)] shrinks as sigma grows. A single Pauli flip always returns to
  // the starting state, leaving G exactly diagonal; a composite coupling has
  // cross-frequency products that make the commutator genuinely nonzero.
  HamiltonianModel pair = build_commuting_local(2, {{"ZZ", 0.9}, {"ZI", 0.35}});
  ComplexMatrix a2 = kron(pauli_x(), ComplexMatrix::Identity(2, 2)) +
                     0.7 * kron(pauli_x(), pauli_x());
  double prev = 1e300;
  for (double sigma : {2.0, 4.0, 8.0}) {
    FilterSpec fs{sigma};
    ComplexMatrix g = lamb_shift_G(a2, pair.eig, fs, Window::infinity(), w);
    double comm = (pair.matrix * g - g * pair.matrix).norm();
    CHECK(comm > 0.0);
    CHECK(comm < prev);
    prev = comm;
  }
}

TEST_CASE("lamb shift H hermitian and diagonal for the toy model") {
  FilterSpec f{4.0};
  HamiltonianModel m = build_single_qubit();
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  CHECK(lamb_shift_H(zero, m.eig, f, Window::infinity(), 0.5, Beta::finite(1.0)).norm() ==
        0.0);

  Rng rng(41);
  ComplexMatrix a = random_matrix(rng, 2, 2);
  ComplexMatrix h =
      lamb_shift_H(a, m.eig, f, Window::infinity(), 0.8, Beta::finite(1.0));
  CHECK(is_hermitian(h, 1e-10));

  ComplexMatrix hx =
      lamb_shift_H(pauli_x(), m.eig, f, Window::infinity(), 0.8, Beta::finite(1.0));
  double scale = std::max(1e-300, hx.cwiseAbs().maxCoeff());
  CHECK(std::abs(hx(0, 1)) / scale < 1e-3);
}

TEST_CASE("dissipator") {
  CHECK(dissipator(ComplexMatrix::Identity(2, 2)).matrix().norm() < 1e-14);

  ComplexMatrix down = ketbra(0, 1);
  ComplexMatrix out = dissipator(down).apply(ketbra(1, 1));
  CHECK((out - (ketbra(0, 0) - ketbra(1, 1))).norm() < 1e-14);

  Rng rng(42);
  ComplexMatrix v = random_matrix(rng, 3, 3);
  ComplexMatrix x = random_matrix(rng, 3, 3);
  CHECK(std::abs(dissipator(v).apply(x).trace()) < 1e-12);
}

TEST_CASE("toy generator fixed point and structure") {
  FilterSpec f{6.0};
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);

  GeneratorBundle ground = toy_generator(Beta::infinity(), f, g);
  // dissipative part proportional to D_{|0><1|} only
  Superoperator down = dissipator(ketbra(0, 1));
  double c = ground.dissipative.matrix().norm() / down.matrix().norm();
  CHECK((ground.dissipative.matrix() - c * down.matrix()).norm() < 1e-10 * c);

  GeneratorBundle sym = toy_generator(Beta::finite(0.0), f, g);
  FixedPointResult fp_sym = fixed_point(superop_exp(sym.dissipative, 1.0));
  CHECK((fp_sym.state.matrix() - 0.5 * ComplexMatrix::Identity(2, 2)).norm() < 1e-9);

  GeneratorBundle th = toy_generator(Beta::finite(1.0), f, g);
  // null state of the dissipative part is the Gibbs state of H = -Z
  FixedPointResult fp = fixed_point(superop_exp(th.dissipative, 1.0));
  double e = std::exp(1.0), z = e + 1.0 / e;
  ComplexMatrix gibbs = ComplexMatrix::Zero(2, 2);
  gibbs(0, 0) = e / z;
  gibbs(1, 1) = (1.0 / e) / z;
  CHECK((fp.state.matrix() - gibbs).norm() < 1e-9);

  // rate constant: c_f = int K^2 = 2 pi for the normalized filter
  CHECK(kernel_square_integral(f) == doctest::Approx(2.0 * kPi).epsilon(1e-9));

  // generator annihilates the trace
  Rng rng(43);
  ComplexMatrix x = random_matrix(rng, 2, 2);
  CHECK(std::abs(th.total.apply(x).trace()) < 1e-9);
}

TEST_CASE("effective generator matches the toy closed form at large sigma") {
  FilterSpec f{6.0};
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);
  HamiltonianModel m = build_single_qubit();
  CouplingSet coupling = coupling_set_for(m);

  GeneratorBundle eff =
      effective_generator(m, coupling, f, Window::infinity(), Beta::infinity(), g);
  GeneratorBundle toy = toy_generator(Beta::infinity(), f, g);
  double dist = induced_trace_norm(eff.total - toy.total);
  CHECK(dist < 1e-2);

  Rng rng(44);
  ComplexMatrix x = random_matrix(rng, 2, 2);
  CHECK(std::abs(eff.total.apply(x).trace()) < 1e-9);
}

TEST_CASE("effective generator on the thermal state shrinks with sigma") {
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);
  HamiltonianModel m = build_single_qubit();
  CouplingSet coupling = coupling_set_for(m);
  DensityMatrix gibbs = thermal_state(m, Beta::finite(1.0));
  double prev = 1e300;
  for (double sigma : {2.0, 4.0, 8.0}) {
    FilterSpec f{sigma};
    GeneratorBundle eff =
        effective_generator(m, coupling, f, Window::infinity(), Beta::finite(1.0), g);
    double norm = trace_norm(eff.total.apply(gibbs.matrix()));
    CHECK(norm < prev);
    prev = norm;
  }
}

TEST_CASE("generator exponentials are CPTP") {
  FilterSpec f{3.0};
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);
  HamiltonianModel m = build_single_qubit();
  CouplingSet coupling = coupling_set_for(m);
  GeneratorBundle eff =
      effective_generator(m, coupling, f, Window::infinity(), Beta::finite(1.0), g);
  for (double s : {0.01, 0.1}) {
    CptpCheck check = cptp_check(superop_exp(eff.total, s));
    CHECK(check.choi_min_eigenvalue > -1e-7);
    CHECK(check.trace_preservation_error < 1e-9);
  }
}

TEST_CASE("davies generator") {
  HamiltonianModel m = build_single_qubit();
  CouplingSet coupling = coupling_set_for(m);
  double tol = Tolerances::bohr_default(m.eig.norm);

  GeneratorBundle unit =
      davies_generator(coupling, m.eig, [](double) { return 1.0; }, tol);
  Superoperator expected = dissipator(ketbra(1, 0)) + dissipator(ketbra(0, 1));
  CHECK((unit.dissipative.matrix() - expected.matrix()).norm() < 1e-12);

  // Gibbs-weighted rates: fixed point is the thermal state (null-space check)
  Beta beta = Beta::finite(1.0);
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);
  GeneratorBundle gibbs_gen = davies_generator(
      coupling, m.eig, [&](double xi) { return gamma_weight(beta, g, xi); }, tol);
  DensityMatrix rho = thermal_state(m, beta);
  CHECK(trace_norm(gibbs_gen.total.apply(rho.matrix())) < 1e-12);

  // GNS detailed balance implies KMS self-adjointness of the transform
  KmsTransform kt = kms_transform(gibbs_gen, rho);
  CHECK(kt.report.kms_residual < 1e-8);
  CHECK(kt.report.antihermitian_norm < 1e-8);
}

TEST_CASE("ground truncated jump") {
  HamiltonianModel m = build_single_qubit();
  FilterSpec f{3.0};
  ComplexMatrix v = jump_operator(pauli_x(), m.eig, f, Window::infinity(), -2.0);
  ComplexMatrix vplus = ground_truncated_jump(v, m.eig, m.eig.gap);
  // keeps the |0><1| component, drops |1><0|
  CHECK(std::abs(vplus(1, 0)) < 1e-14);
  CHECK(std::abs(vplus(0, 1) - v(0, 1)) < 1e-12);
  ComplexVector ground = ComplexVector::Zero(2);
  ground(0) = 1.0;
  CHECK((vplus * ground).norm() == 0.0);

  // diagonal operators survive untouched
  ComplexMatrix diag = pauli_z();
  CHECK((ground_truncated_jump(diag, m.eig, m.eig.gap) - diag).norm() < 1e-12);

  // tail bound: ||V - V+|| dominated by the Gaussian tail at omega <= 0
  FilterSpec f6{6.0};
  for (double w : {-2.5, -1.0, 0.0}) {
    ComplexMatrix vv = jump_operator(pauli_x(), m.eig, f6, Window::infinity(), w);
    ComplexMatrix vp = ground_truncated_jump(vv, m.eig, m.eig.gap);
    double tail = std::abs(filter_kernel(f6, Window::infinity(), 2.0 - w));
    CHECK(operator_norm(vv - vp) <= tail + 1e-12);
  }
}

TEST_CASE("kms transform special cases") {
  HamiltonianModel m = build_single_qubit();
  DensityMatrix rho = thermal_state(m, Beta::finite(1.0));

  // pure commuting drift: K is entirely antihermitian
  GeneratorBundle drift = GeneratorBundle::assemble(
      m.matrix, Superoperator::zero(2), GeneratorProvenance::custom);
  KmsTransform kt = kms_transform(drift, rho);
  CHECK(kt.hermitian_part.matrix().norm() < 1e-12);
  CHECK(kt.report.antihermitian_norm > 0.1);
  CHECK(kt.report.drift_commutator < 1e-12);

  // K applied to sqrt(rho) vanishes for any generator fixing rho with
  // vanishing trace: use the Gibbs-weighted Davies generator.
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);
  Beta beta = Beta::finite(1.0);
  GeneratorBundle davies = davies_generator(
      coupling_set_for(m), m.eig,
      [&](double xi) { return gamma_weight(beta, g, xi); },
      Tolerances::bohr_default(m.eig.norm));
  Superoperator k_total(2, (kms_transform(davies, rho).hermitian_part.matrix() +
                            kms_transform(davies, rho).antihermitian_part.matrix())
                               .eval());
  ComplexMatrix sqrt_rho = herm_power(rho.matrix(), 0.5);
  CHECK(k_total.apply(sqrt_rho).norm() < 1e-10);

  // beta = inf is rejected
  DensityMatrix ground = thermal_state(m, Beta::infinity());
  CHECK_THROWS_AS(kms_transform(davies, ground), Error);
}

TEST_CASE("r integral trends") {
  FrequencyDistribution g = FrequencyDistribution::uniform(3.0);
  Beta beta = Beta::finite(1.0);
  double prev = 1e300;
  for (double sigma : {2.0, 8.0, 32.0}) {
    double r = r_integral(g, beta, sigma);
    CHECK(r > 0.0);
    CHECK(r < prev);
    prev = r;
  }
  // large omega_max concentrates gamma-hat and shrinks R
  FrequencyDistribution wide = FrequencyDistribution::uniform(60.0);
  CHECK(r_integral(wide, beta, 8.0) < r_integral(g, beta, 8.0));
}

TEST_CASE("frequency distributions normalize") {
  for (auto g : {FrequencyDistribution::uniform(3.0),
                 FrequencyDistribution::gaussian_x(1.0, 4.0, 2.0)}) {
    QuadRule quad = g.quadrature();
    double mass = 0.0, density_mass = 0.0;
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
      mass += quad.weights[i];
      CHECK(g.density(quad.nodes[i]) >= 0.0);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    // independent check of the density normalization, integrating over the
    // support so the uniform case's jumps sit on the boundary
    double lo, hi;
    if (g.kind == FrequencyKind::uniform) {
      lo = 0.0;
      hi = g.omega_max;
    } else {
      double center = -(g.beta / (8.0 * g.sigma * g.sigma) + g.omega_max);
      double spread = 14.0 * std::sqrt(2.0 * g.omega_max / g.beta);
      lo = center - spread;
      hi = center + spread;
    }
    density_mass = integrate_adaptive(
                       [&](double w) { return Complex(g.density(w), 0.0); }, lo, hi,
                       1e-9, 1e-9, 16)
                       .real();
    CHECK(density_mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}
